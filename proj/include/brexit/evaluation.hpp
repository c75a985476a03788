#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "brexit/game.hpp"
#include "brexit/policy.hpp"
#include "brexit/rng.hpp"

namespace brexit {

struct MatchResult {
  int wins_a = 0;
  int wins_b = 0;
  int draws = 0;
  /// Games lost by an illegal move (already counted as wins for the other side).
  int forfeits_a = 0;
  int forfeits_b = 0;

  int games() const { return wins_a + wins_b + draws; }
  /// (wins + draws / 2) / games for agent a; 0.5 when no games were played.
  double winrate_a() const;
  double winrate_b() const;
};

/// Plays n_games between a and b with the seats drawn uniformly per game. Each game
/// has its own RNG stream derived from one draw of `rng`, so results do not depend on
/// `threads`. An illegal action forfeits the game for the offender and is logged.
MatchResult play_matches(const GameRules& rules, const Policy& a, const Policy& b, int n_games, Rng& rng,
                         int threads = 1);

struct NamedPolicy {
  std::string label;
  std::shared_ptr<const Policy> policy;
};

/// entries[i][j] is the winrate of agent i against agent j; entries[i][j] + entries[j][i] == 1.
struct WinrateMatrix {
  std::vector<std::string> agents;
  std::vector<std::vector<double>> entries;
  int games_per_cell = 0;
};

/// Plays every unordered pair once. Diagonal cells are filled by self-play when
/// `self_play_diagonal` is set and left at 0.5 otherwise.
WinrateMatrix winrate_matrix(const GameRules& rules, const std::vector<NamedPolicy>& agents, int games_per_cell,
                             Rng& rng, int threads = 1, bool self_play_diagonal = false);

struct StrengthSweep {
  std::vector<int> budgets;     // budgets evaluated, in grid order
  std::vector<double> winrates; // rollout-MCTS winrate against the target per budget
  std::optional<int> reached;   // first budget with winrate >= goal
};

/// Random-rollout MCTS at increasing budgets against `target` until the MCTS agent's
/// winrate reaches `goal`. With stop_at_goal = false the whole grid is evaluated.
StrengthSweep mcts_equivalent_strength(const GameRules& rules, const Policy& target, double goal,
                                       const std::vector<int>& budget_grid, int games_per_budget, Rng& rng,
                                       int threads = 1, bool stop_at_goal = true);

}  // namespace brexit
