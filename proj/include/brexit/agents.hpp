#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "brexit/config.hpp"
#include "brexit/policy.hpp"

namespace brexit {

/// Builds a policy from a textual spec:
///   random
///   heuristic[:EPSILON]
///   mcts:BUDGET                  random-rollout MCTS with uniform priors
///   checkpoint:PATH[:sample]     apprentice actor (argmax unless ":sample")
///   expert:PATH:BUDGET           apprentice-guided MCTS, most visited action
/// Throws std::invalid_argument for malformed specs and CheckpointError for unreadable checkpoints.
std::shared_ptr<const Policy> make_policy(std::string_view spec, const GameRules& rules);

/// Fixed opponent for a config block. Self-play is handled by the trainer and rejected here.
std::shared_ptr<const Policy> make_opponent(const OpponentConfig& opponent, const GameRules& rules);

/// Loads a checkpoint's apprentice, checking that its board matches `rules`.
std::shared_ptr<const Network> load_apprentice(const std::string& path, const GameRules& rules);

}  // namespace brexit
