#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "brexit/game.hpp"

namespace brexit {

/// Which parts of opponent modelling a run uses.
///   ExIt:        no opponent-model heads, apprentice priors at every node.
///   ExIt-OMFS:   opponent-model heads trained for feature shaping only.
///   BRExIt-OMS:  learned opponent-model heads supply priors at opponent nodes.
///   BRExIt:      ground-truth opponent policies supply priors at opponent nodes.
enum class AblationMode { kExIt, kExItOMFS, kBRExItOMS, kBRExIt };

enum class OpponentTargetEncoding { kFullDistribution, kOneHot };

constexpr bool uses_opponent_models(AblationMode mode) { return mode != AblationMode::kExIt; }

std::string_view to_string(AblationMode mode);
AblationMode parse_ablation_mode(std::string_view text);
std::string_view to_string(OpponentTargetEncoding encoding);
OpponentTargetEncoding parse_target_encoding(std::string_view text);

/// A state an opponent acted in, encoded later from that opponent's perspective.
struct OpponentRecord {
  GameState state;
  std::vector<double> target;
  int opponent_index = 0;
};

struct TrainingSample {
  GameState state;
  std::vector<double> mcts_policy;
  /// Present iff the run trains opponent models; may be empty when the agent's move ended the game.
  std::optional<std::vector<OpponentRecord>> opponent_records;
  double value_target = 0.0;
};

}  // namespace brexit
