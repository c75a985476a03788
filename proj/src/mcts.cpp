#include "brexit/mcts.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace brexit {

int SearchNode::total_visits() const {
  int n = 0;
  for (const EdgeStats& e : edges) n += e.visits;
  return n;
}

std::vector<double> RootStatistics::visit_counts() const {
  std::vector<double> counts(static_cast<std::size_t>(num_actions), 0.0);
  for (std::size_t i = 0; i < actions.size(); ++i) counts[static_cast<std::size_t>(actions[i])] = edges[i].visits;
  return counts;
}

int RootStatistics::most_visited_action() const {
  if (actions.empty()) throw std::logic_error("root statistics are empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < actions.size(); ++i)
    if (edges[i].visits > edges[best].visits) best = i;
  return actions[best];
}

const EdgeStats& RootStatistics::edge(int action) const {
  for (std::size_t i = 0; i < actions.size(); ++i)
    if (actions[i] == action) return edges[i];
  throw std::out_of_range("no root edge for action " + std::to_string(action));
}

int select_child(const SearchNode& node, double c_puct) {
  if (node.edges.empty()) throw std::logic_error("select_child: node has no edges");
  const int total = node.total_visits();
  std::size_t best = 0;
  if (total == 0) {
    for (std::size_t i = 1; i < node.edges.size(); ++i)
      if (node.edges[i].prior > node.edges[best].prior) best = i;
    return static_cast<int>(best);
  }
  const double sqrt_total = std::sqrt(static_cast<double>(total));
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < node.edges.size(); ++i) {
    const EdgeStats& e = node.edges[i];
    const double score = e.mean_value + c_puct * e.prior * sqrt_total / (1.0 + e.visits);
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return static_cast<int>(best);
}

std::vector<double> compute_priors(const GameRules& rules, const GameState& state, std::span<const int> legal,
                                   int node_player, int agent_player, const PriorSource& source,
                                   const NetworkOutput* apprentice, Rng& rng) {
  if (legal.empty()) throw std::invalid_argument("compute_priors: no legal actions");
  if (node_player < 0 || node_player >= kNumPlayers) throw std::invalid_argument("compute_priors: unknown player");

  std::vector<double> full;
  const bool agent_node = node_player == agent_player;
  switch (source.mode) {
    case PriorMode::kUniform:
      return std::vector<double>(legal.size(), 1.0 / static_cast<double>(legal.size()));
    case PriorMode::kApprenticeEverywhere:
      if (!apprentice) throw std::invalid_argument("compute_priors: apprentice output required");
      full = apprentice->actor;
      break;
    case PriorMode::kGroundTruthOpponents:
      if (agent_node) {
        if (!apprentice) throw std::invalid_argument("compute_priors: apprentice output required");
        full = apprentice->actor;
      } else {
        if (source.opponent_policies.empty() || source.opponent_policies[0] == nullptr)
          throw std::invalid_argument("compute_priors: ground-truth mode without an opponent policy");
        full = source.opponent_policies[0]->distribution(state, rng);
      }
      break;
    case PriorMode::kLearnedOpponentModels:
      if (!apprentice) throw std::invalid_argument("compute_priors: apprentice output required");
      if (agent_node) {
        full = apprentice->actor;
      } else {
        if (apprentice->opponent_models.empty())
          throw std::invalid_argument("compute_priors: learned opponent-model priors need an opponent-model head");
        full = apprentice->opponent_models[0];
      }
      break;
  }
  if (full.size() != static_cast<std::size_t>(rules.num_actions()))
    throw std::invalid_argument("compute_priors: prior has the wrong length");

  std::vector<double> priors(legal.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < legal.size(); ++i) {
    priors[i] = std::max(full[static_cast<std::size_t>(legal[i])], 0.0);
    sum += priors[i];
  }
  if (!(sum > 0.0)) throw std::invalid_argument("compute_priors: prior puts no mass on legal actions");
  for (double& p : priors) p /= sum;
  return priors;
}

void backup(std::span<const std::pair<SearchNode*, int>> path, double leaf_value, int leaf_player) {
  for (const auto& [node, index] : path) {
    EdgeStats& e = node->edges[static_cast<std::size_t>(index)];
    const double v = node->player == leaf_player ? leaf_value : -leaf_value;
    ++e.visits;
    e.mean_value += (v - e.mean_value) / e.visits;
  }
}

double evaluate_leaf(const GameRules& rules, const GameState& state, int player, LeafEvaluation mode,
                     const NetworkOutput* apprentice, Rng& rng) {
  if (state.terminal()) return rules.rewards(state)[static_cast<std::size_t>(player)];
  if (mode == LeafEvaluation::kApprenticeCritic) {
    if (!apprentice) throw std::invalid_argument("evaluate_leaf: apprentice output required");
    return state.to_move() == player ? apprentice->critic : -apprentice->critic;
  }
  GameState s = state;
  while (!s.terminal()) {
    const auto actions = rules.legal_actions(s);
    s = rules.apply_action(s, actions[uniform_index(rng, actions.size())]).next_state;
  }
  return rules.rewards(s)[static_cast<std::size_t>(player)];
}

std::vector<double> apply_root_dirichlet(std::span<const double> priors, double alpha, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("dirichlet: epsilon must lie in [0, 1]");
  if (!(alpha > 0.0)) throw std::invalid_argument("dirichlet: alpha must be positive");
  std::vector<double> out(priors.begin(), priors.end());
  if (epsilon == 0.0 || priors.empty()) return out;
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> noise(priors.size());
  double sum = 0.0;
  for (double& x : noise) {
    x = gamma(rng);
    sum += x;
  }
  if (!(sum > 0.0)) {
    // Every draw underflowed; fall back to the uniform point of the simplex.
    std::fill(noise.begin(), noise.end(), 1.0);
    sum = static_cast<double>(noise.size());
  }
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = epsilon * (noise[i] / sum) + (1.0 - epsilon) * priors[i];
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

std::vector<double> extract_policy(std::span<const double> visits, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("extract_policy: temperature must be positive");
  double max_log = -std::numeric_limits<double>::infinity();
  for (double n : visits) {
    if (n < 0.0) throw std::invalid_argument("extract_policy: negative visit count");
    if (n > 0.0) max_log = std::max(max_log, std::log(n) / tau);
  }
  if (std::isinf(max_log)) throw std::invalid_argument("extract_policy: all visit counts are zero");
  std::vector<double> pi(visits.size(), 0.0);
  double sum = 0.0;
  for (std::size_t a = 0; a < visits.size(); ++a) {
    if (visits[a] > 0.0) pi[a] = std::exp(std::log(visits[a]) / tau - max_log);
    sum += pi[a];
  }
  for (double& p : pi) p /= sum;
  return pi;
}

Mcts::Mcts(GameRules rules, SearchConfig config, PriorSource priors, const Evaluator* apprentice)
    : rules_(std::move(rules)), config_(config), priors_(std::move(priors)), apprentice_(apprentice) {
  if (needs_apprentice() && apprentice_ == nullptr)
    throw std::invalid_argument("mcts: this prior/leaf configuration needs an apprentice");
  if (priors_.mode == PriorMode::kGroundTruthOpponents &&
      (priors_.opponent_policies.empty() || priors_.opponent_policies[0] == nullptr))
    throw std::invalid_argument("mcts: ground-truth priors need an opponent policy");
}

bool Mcts::needs_apprentice() const {
  return priors_.mode != PriorMode::kUniform || config_.leaf == LeafEvaluation::kApprenticeCritic;
}

SearchResult Mcts::search(const GameState& root, Rng& rng) const {
  if (root.terminal()) throw std::invalid_argument("search: root state is terminal");
  if (config_.budget < 1) throw std::invalid_argument("search: budget must be at least 1");
  const int agent = root.to_move();
  const bool use_apprentice = needs_apprentice();

  std::vector<SearchNode> nodes;
  nodes.reserve(static_cast<std::size_t>(config_.budget) + 1);

  // Creates a node for a non-terminal state and returns its value for the player to move.
  auto expand = [&](const GameState& state) -> double {
    SearchNode node;
    node.player = state.to_move();
    node.actions = rules_.legal_actions(state);
    NetworkOutput output;
    if (use_apprentice) output = apprentice_->evaluate(state);
    const NetworkOutput* out = use_apprentice ? &output : nullptr;
    std::vector<double> priors =
        compute_priors(rules_, state, node.actions, node.player, agent, priors_, out, rng);
    if (nodes.empty() && config_.dirichlet)
      priors = apply_root_dirichlet(priors, config_.dirichlet_alpha, config_.dirichlet_epsilon, rng);
    node.edges.resize(node.actions.size());
    for (std::size_t i = 0; i < priors.size(); ++i) node.edges[i].prior = priors[i];
    node.children.assign(node.actions.size(), -1);
    nodes.push_back(std::move(node));
    if (nodes.size() == 1) return 0.0;  // the root's own value is never backed up
    return evaluate_leaf(rules_, state, state.to_move(), config_.leaf, out, rng);
  };

  expand(root);
  std::vector<std::pair<int, int>> trail;
  std::vector<std::pair<SearchNode*, int>> path;
  for (int iteration = 0; iteration < config_.budget; ++iteration) {
    trail.clear();
    GameState state = root;
    int current = 0;
    double value = 0.0;
    while (true) {
      const int edge = select_child(nodes[static_cast<std::size_t>(current)], config_.c_puct);
      trail.emplace_back(current, edge);
      const SearchNode& node = nodes[static_cast<std::size_t>(current)];
      state = rules_.apply_action(state, node.actions[static_cast<std::size_t>(edge)]).next_state;
      if (state.terminal()) {
        value = rules_.rewards(state)[static_cast<std::size_t>(state.to_move())];
        break;
      }
      const int child = node.children[static_cast<std::size_t>(edge)];
      if (child < 0) {
        value = expand(state);
        nodes[static_cast<std::size_t>(current)].children[static_cast<std::size_t>(edge)] =
            static_cast<int>(nodes.size()) - 1;
        break;
      }
      current = child;
    }
    path.clear();
    for (const auto& [index, edge] : trail) path.emplace_back(&nodes[static_cast<std::size_t>(index)], edge);
    backup(path, value, state.to_move());
  }

  SearchResult result;
  result.root.actions = nodes[0].actions;
  result.root.edges = nodes[0].edges;
  result.root.num_actions = rules_.num_actions();
  result.action = result.root.most_visited_action();
  return result;
}

MctsPolicy::MctsPolicy(GameRules rules, SearchConfig config, PriorSource priors,
                       std::shared_ptr<const Evaluator> apprentice, std::string label)
    : apprentice_(std::move(apprentice)),
      mcts_(rules, config, std::move(priors), apprentice_.get()),
      rules_(std::move(rules)),
      label_(std::move(label)) {}

int MctsPolicy::act(const GameState& state, Rng& rng) const { return mcts_.search(state, rng).action; }

std::vector<double> MctsPolicy::distribution(const GameState& state, Rng& rng) const {
  std::vector<double> dist(static_cast<std::size_t>(rules_.num_actions()), 0.0);
  dist[static_cast<std::size_t>(act(state, rng))] = 1.0;
  return dist;
}

std::shared_ptr<MctsPolicy> MctsPolicy::rollout_agent(const GameRules& rules, int budget, double c_puct) {
  SearchConfig cfg;
  cfg.budget = budget;
  cfg.c_puct = c_puct;
  cfg.leaf = LeafEvaluation::kRandomRollout;
  PriorSource priors;
  priors.mode = PriorMode::kUniform;
  return std::make_shared<MctsPolicy>(rules, cfg, priors, nullptr, "mcts:" + std::to_string(budget));
}

}  // namespace brexit
