#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "brexit/game.hpp"
#include "brexit/policy.hpp"
#include "brexit/rng.hpp"

namespace brexit {

struct EdgeStats {
  int visits = 0;
  /// Running mean of backed-up values, from the perspective of the player owning the edge.
  double mean_value = 0.0;
  double prior = 0.0;
};

struct SearchNode {
  int player = 0;
  std::vector<int> actions;
  std::vector<EdgeStats> edges;
  std::vector<int> children;  // node index per edge, -1 while unexpanded

  int total_visits() const;
};

/// Where the priors P(s, a) come from.
///   kUniform:                uniform over legal actions (baseline rollout agents).
///   kApprenticeEverywhere:   apprentice actor at every node (ExIt).
///   kGroundTruthOpponents:   actor at the agent's nodes, the real opponent policy elsewhere.
///   kLearnedOpponentModels:  actor at the agent's nodes, the opponent-model head elsewhere.
enum class PriorMode { kUniform, kApprenticeEverywhere, kGroundTruthOpponents, kLearnedOpponentModels };

struct PriorSource {
  PriorMode mode = PriorMode::kApprenticeEverywhere;
  /// Indexed by opponent number; required in kGroundTruthOpponents mode.
  std::vector<const Policy*> opponent_policies;
};

enum class LeafEvaluation { kApprenticeCritic, kRandomRollout };

struct SearchConfig {
  int budget = 50;
  double c_puct = 2.0;
  LeafEvaluation leaf = LeafEvaluation::kApprenticeCritic;
  bool dirichlet = false;
  double dirichlet_alpha = std::sqrt(2.0);
  double dirichlet_epsilon = 0.25;
};

/// Root edge statistics laid out over the full action space.
struct RootStatistics {
  std::vector<int> actions;
  std::vector<EdgeStats> edges;
  int num_actions = 0;

  std::vector<double> visit_counts() const;
  /// Most visited root action, lowest index on ties.
  int most_visited_action() const;
  const EdgeStats& edge(int action) const;
};

struct SearchResult {
  int action = -1;
  RootStatistics root;
};

/// argmax_a Q + c * P * sqrt(sum N) / (1 + N), lowest index on ties. When no edge has
/// been visited the exploration term vanishes and the highest prior is chosen instead.
/// Returns an index into node.actions.
int select_child(const SearchNode& node, double c_puct);

/// Priors over `legal` (same order) for a node whose player is `node_player`; the
/// searching agent is `agent_player`. With two players the single opponent has index 0.
/// `apprentice` may be null in kUniform mode.
std::vector<double> compute_priors(const GameRules& rules, const GameState& state, std::span<const int> legal,
                                   int node_player, int agent_player, const PriorSource& source,
                                   const NetworkOutput* apprentice, Rng& rng);

/// Adds one value to every edge on the path; each edge stores it from its owner's perspective.
void backup(std::span<const std::pair<SearchNode*, int>> path, double leaf_value, int leaf_player);

/// Value of `state` for `player`: the exact reward when terminal, else the apprentice
/// critic (for the player to move, sign-adjusted) or one uniform-random playout.
double evaluate_leaf(const GameRules& rules, const GameState& state, int player, LeafEvaluation mode,
                     const NetworkOutput* apprentice, Rng& rng);

/// epsilon * Dirichlet(alpha) + (1 - epsilon) * priors.
std::vector<double> apply_root_dirichlet(std::span<const double> priors, double alpha, double epsilon, Rng& rng);

/// pi(a) proportional to N(a)^(1/tau), computed in log space. Throws if every count is zero.
std::vector<double> extract_policy(std::span<const double> visits, double tau);

/// Open-loop MCTS: nodes are keyed by action sequences from the root and states are
/// recomputed by replaying actions. The root is expanded before the first iteration and
/// each iteration adds exactly one visit to a root edge. The player to move at the root
/// is the searching agent.
class Mcts {
 public:
  /// `apprentice` is required unless priors are uniform and leaves use rollouts.
  Mcts(GameRules rules, SearchConfig config, PriorSource priors, const Evaluator* apprentice);

  /// Throws std::invalid_argument on terminal roots or a budget below 1.
  SearchResult search(const GameState& root, Rng& rng) const;

  const SearchConfig& config() const { return config_; }
  const PriorSource& priors() const { return priors_; }

 private:
  bool needs_apprentice() const;

  GameRules rules_;
  SearchConfig config_;
  PriorSource priors_;
  const Evaluator* apprentice_;
};

/// Plays the most visited root action of a fresh search each move.
class MctsPolicy final : public Policy {
 public:
  MctsPolicy(GameRules rules, SearchConfig config, PriorSource priors, std::shared_ptr<const Evaluator> apprentice,
             std::string label);
  std::vector<double> distribution(const GameState& state, Rng& rng) const override;
  int act(const GameState& state, Rng& rng) const override;
  std::string name() const override { return label_; }

  /// Random-rollout agent with uniform priors.
  static std::shared_ptr<MctsPolicy> rollout_agent(const GameRules& rules, int budget, double c_puct = 2.0);

 private:
  std::shared_ptr<const Evaluator> apprentice_;
  Mcts mcts_;
  GameRules rules_;
  std::string label_;
};

}  // namespace brexit
