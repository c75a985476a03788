#include "brexit/evaluation.hpp"

#include <spdlog/spdlog.h>

#include <stdexcept>

#include "brexit/mcts.hpp"
#include "brexit/parallel.hpp"

namespace brexit {

namespace {

enum class GameOutcome : std::uint8_t { kWinA, kWinB, kDraw, kForfeitA, kForfeitB };

GameOutcome play_one(const GameRules& rules, const Policy& a, const Policy& b, Rng& rng) {
  const int seat_a = static_cast<int>(uniform_index(rng, kNumPlayers));
  GameState state = rules.initial_state();
  while (!state.terminal()) {
    const bool a_moves = state.to_move() == seat_a;
    const Policy& mover = a_moves ? a : b;
    const int action = mover.act(state, rng);
    if (!rules.is_legal(state, action)) {
      spdlog::warn("{} (seat {}) played illegal action {}; game forfeited", mover.name(), state.to_move(), action);
      return a_moves ? GameOutcome::kForfeitA : GameOutcome::kForfeitB;
    }
    state = rules.apply_action(state, action).next_state;
  }
  const auto winner = state.winner();
  if (!winner) return GameOutcome::kDraw;
  return *winner == seat_a ? GameOutcome::kWinA : GameOutcome::kWinB;
}

}  // namespace

double MatchResult::winrate_a() const {
  if (games() == 0) return 0.5;
  return (2.0 * wins_a + draws) / (2.0 * games());
}

double MatchResult::winrate_b() const {
  if (games() == 0) return 0.5;
  return (2.0 * wins_b + draws) / (2.0 * games());
}

MatchResult play_matches(const GameRules& rules, const Policy& a, const Policy& b, int n_games, Rng& rng,
                         int threads) {
  if (n_games < 0) throw std::invalid_argument("play_matches: negative game count");
  const std::uint64_t base = rng();
  std::vector<GameOutcome> outcomes(static_cast<std::size_t>(n_games));
  parallel_for(outcomes.size(), threads, [&](std::size_t i) {
    Rng game_rng(derive_seed(base, i));
    outcomes[i] = play_one(rules, a, b, game_rng);
  });
  MatchResult r;
  for (GameOutcome o : outcomes) {
    switch (o) {
      case GameOutcome::kWinA: ++r.wins_a; break;
      case GameOutcome::kWinB: ++r.wins_b; break;
      case GameOutcome::kDraw: ++r.draws; break;
      case GameOutcome::kForfeitA: ++r.forfeits_a; ++r.wins_b; break;
      case GameOutcome::kForfeitB: ++r.forfeits_b; ++r.wins_a; break;
    }
  }
  return r;
}

WinrateMatrix winrate_matrix(const GameRules& rules, const std::vector<NamedPolicy>& agents, int games_per_cell,
                             Rng& rng, int threads, bool self_play_diagonal) {
  const std::size_t n = agents.size();
  WinrateMatrix m;
  m.games_per_cell = games_per_cell;
  m.entries.assign(n, std::vector<double>(n, 0.5));
  for (const auto& agent : agents) m.agents.push_back(agent.label);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      if (i == j && !self_play_diagonal) continue;
      const MatchResult r = play_matches(rules, *agents[i].policy, *agents[j].policy, games_per_cell, rng, threads);
      if (i == j) {
        m.entries[i][i] = r.winrate_a();
        continue;
      }
      // Derive the smaller entry from the larger one: 1 - x is exact for x in [0.5, 1],
      // so the pair sums to exactly 1.
      const double wa = r.winrate_a();
      if (wa >= 0.5) {
        m.entries[i][j] = wa;
        m.entries[j][i] = 1.0 - wa;
      } else {
        m.entries[j][i] = r.winrate_b();
        m.entries[i][j] = 1.0 - m.entries[j][i];
      }
    }
  }
  return m;
}

StrengthSweep mcts_equivalent_strength(const GameRules& rules, const Policy& target, double goal,
                                       const std::vector<int>& budget_grid, int games_per_budget, Rng& rng,
                                       int threads, bool stop_at_goal) {
  if (!(goal >= 0.0 && goal <= 1.0)) throw std::invalid_argument("mcts_equivalent_strength: goal outside [0, 1]");
  for (std::size_t i = 0; i < budget_grid.size(); ++i)
    if (budget_grid[i] < 1 || (i > 0 && budget_grid[i] <= budget_grid[i - 1]))
      throw std::invalid_argument("mcts_equivalent_strength: budget grid must be positive and ascending");
  StrengthSweep sweep;
  for (int budget : budget_grid) {
    const auto agent = MctsPolicy::rollout_agent(rules, budget);
    const double w = play_matches(rules, *agent, target, games_per_budget, rng, threads).winrate_a();
    sweep.budgets.push_back(budget);
    sweep.winrates.push_back(w);
    if (!sweep.reached && w >= goal) {
      sweep.reached = budget;
      if (stop_at_goal) break;
    }
  }
  return sweep;
}

}  // namespace brexit
