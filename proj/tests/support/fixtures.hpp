#pragma once

#include <vector>

#include "brexit/game.hpp"
#include "brexit/rng.hpp"
#include "brexit/sample.hpp"

namespace brexit::testing {

/// Plays uniformly random moves from the initial state and returns the position after
/// `plies` moves, or the last non-terminal one if the game ended earlier.
inline GameState random_state(const GameRules& rules, Rng& rng, int plies) {
  GameState s = rules.initial_state();
  for (int i = 0; i < plies; ++i) {
    const auto actions = rules.legal_actions(s);
    GameState next = rules.apply_action(s, actions[uniform_index(rng, actions.size())]).next_state;
    if (next.terminal()) break;
    s = next;
  }
  return s;
}

/// Random distribution supported on the legal actions of `state`.
inline std::vector<double> random_legal_distribution(const GameRules& rules, const GameState& state, Rng& rng) {
  std::vector<double> d(static_cast<std::size_t>(rules.num_actions()), 0.0);
  double sum = 0.0;
  for (int a : rules.legal_actions(state)) {
    d[static_cast<std::size_t>(a)] = 0.05 + uniform01(rng);
    sum += d[static_cast<std::size_t>(a)];
  }
  for (double& p : d) p /= sum;
  return d;
}

/// A synthetic training sample with random targets. Opponent records are attached
/// (one or two per sample) when the mode trains opponent models.
inline TrainingSample random_sample(const GameRules& rules, Rng& rng, AblationMode mode) {
  TrainingSample s;
  const int max_plies = rules.config().height * rules.config().width - 2;
  s.state = random_state(rules, rng, static_cast<int>(uniform_index(rng, static_cast<std::size_t>(max_plies))));
  s.mcts_policy = random_legal_distribution(rules, s.state, rng);
  s.value_target = uniform(rng, -1.0, 1.0);
  if (uses_opponent_models(mode)) {
    s.opponent_records.emplace();
    const int records = 1 + static_cast<int>(uniform_index(rng, 2));
    for (int r = 0; r < records; ++r) {
      OpponentRecord rec;
      rec.state = random_state(rules, rng, 1 + static_cast<int>(uniform_index(rng, 8)));
      rec.target = random_legal_distribution(rules, rec.state, rng);
      s.opponent_records->push_back(std::move(rec));
    }
  }
  return s;
}

inline std::vector<TrainingSample> random_batch(const GameRules& rules, Rng& rng, AblationMode mode,
                                                std::size_t n) {
  std::vector<TrainingSample> batch;
  for (std::size_t i = 0; i < n; ++i) batch.push_back(random_sample(rules, rng, mode));
  return batch;
}

}  // namespace brexit::testing
