#include "brexit/policy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace brexit {

NetworkOutput NetworkEvaluator::evaluate(const GameState& state) const {
  return network_->forward(rules_.encode_state(state, state.to_move()), rules_.legal_mask(state));
}

int Policy::act(const GameState& state, Rng& rng) const {
  const std::vector<double> dist = distribution(state, rng);
  return static_cast<int>(sample_categorical(dist, rng));
}

std::vector<double> mask_and_normalize(const GameRules& rules, const GameState& state, std::vector<double> dist) {
  if (dist.size() != static_cast<std::size_t>(rules.num_actions()))
    throw std::invalid_argument("policy distribution has the wrong length");
  const std::vector<std::uint8_t> mask = rules.legal_mask(state);
  double sum = 0.0;
  for (std::size_t a = 0; a < dist.size(); ++a) {
    if (!mask[a] || !(dist[a] > 0.0)) dist[a] = 0.0;
    sum += dist[a];
  }
  if (!(sum > 0.0)) throw std::invalid_argument("policy puts no mass on legal actions");
  for (double& p : dist) p /= sum;
  return dist;
}

std::vector<double> UniformRandomPolicy::distribution(const GameState& state, Rng&) const {
  std::vector<double> dist(static_cast<std::size_t>(rules_.num_actions()), 0.0);
  const auto actions = rules_.legal_actions(state);
  for (int a : actions) dist[static_cast<std::size_t>(a)] = 1.0 / static_cast<double>(actions.size());
  return dist;
}

HeuristicPolicy::HeuristicPolicy(GameRules rules, double epsilon) : rules_(std::move(rules)), epsilon_(epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("heuristic epsilon must lie in [0, 1]");
}

std::string HeuristicPolicy::name() const {
  return epsilon_ > 0.0 ? "heuristic:" + std::to_string(epsilon_) : "heuristic";
}

int HeuristicPolicy::preferred_action(const GameState& state) const {
  const auto actions = rules_.legal_actions(state);
  const int mover = state.to_move();
  for (int a : actions)
    if (rules_.wins_with(state, a, mover)) return a;
  for (int a : actions)
    if (rules_.wins_with(state, a, 1 - mover)) return a;

  const GameConfig& cfg = rules_.config();
  const double center_row = (cfg.height - 1) / 2.0;
  const double center_col = (cfg.width - 1) / 2.0;
  int best = actions.front();
  double best_distance = std::numeric_limits<double>::infinity();
  for (int a : actions) {
    const double d = cfg.gravity ? std::abs(a - center_col)
                                 : std::hypot(a / cfg.width - center_row, a % cfg.width - center_col);
    if (d < best_distance - 1e-12) {
      best_distance = d;
      best = a;
    }
  }
  return best;
}

std::vector<double> HeuristicPolicy::distribution(const GameState& state, Rng&) const {
  const auto actions = rules_.legal_actions(state);
  std::vector<double> dist(static_cast<std::size_t>(rules_.num_actions()), 0.0);
  for (int a : actions) dist[static_cast<std::size_t>(a)] = epsilon_ / static_cast<double>(actions.size());
  dist[static_cast<std::size_t>(preferred_action(state))] += 1.0 - epsilon_;
  return dist;
}

ApprenticePolicy::ApprenticePolicy(std::shared_ptr<const Evaluator> evaluator, GameRules rules, bool greedy)
    : evaluator_(std::move(evaluator)), rules_(std::move(rules)), greedy_(greedy) {
  if (!evaluator_) throw std::invalid_argument("apprentice policy needs an evaluator");
}

std::vector<double> ApprenticePolicy::distribution(const GameState& state, Rng&) const {
  std::vector<double> actor = evaluator_->evaluate(state).actor;
  if (!greedy_) return actor;
  std::size_t best = 0;
  for (std::size_t a = 1; a < actor.size(); ++a)
    if (actor[a] > actor[best]) best = a;
  std::vector<double> one_hot(actor.size(), 0.0);
  one_hot[best] = 1.0;
  return one_hot;
}

}  // namespace brexit
