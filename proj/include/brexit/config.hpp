#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "brexit/game.hpp"
#include "brexit/mcts.hpp"
#include "brexit/sample.hpp"
#include "brexit/training.hpp"

namespace brexit {

/// Who the learning agent trains against.
///   random | heuristic (with epsilon) | mcts (rollout agent, budget) |
///   checkpoint (frozen apprentice from `path`) | self-play (uniform over past snapshots)
struct OpponentConfig {
  std::string kind = "random";
  double epsilon = 0.1;
  int budget = 50;
  std::string path;
  bool greedy = false;

  friend bool operator==(const OpponentConfig&, const OpponentConfig&) = default;
};

struct RunConfig {
  std::uint64_t seed = 1;
  GameConfig game;

  AblationMode mode = AblationMode::kBRExIt;
  OpponentTargetEncoding om_target_encoding = OpponentTargetEncoding::kFullDistribution;

  struct Search {
    int budget = 50;
    double c_puct = 2.0;
    bool rollout = false;
    bool dirichlet = false;
    double dirichlet_alpha = 1.4142135623730951;
    double dirichlet_epsilon = 0.25;
    int temperature_plies = 10;
    double tau_explore = 1.0;
    double tau_exploit = 0.01;
  } search;

  struct Training {
    int generations = 100;
    int episodes_per_generation = 800;
    int epochs = 5;
    int batch_size = 512;
    double learning_rate = 1.5e-3;
    double grad_clip = 1.0;
    int buffer_capacity = 40000;
    ValueTargetVariant value_target = ValueTargetVariant::kChosenQ;
    double gamma = 1.0;
  } training;

  struct NetworkShape {
    std::vector<int> conv_channels{12, 15, 20, 20, 20, 1};
    std::vector<int> om_hidden{128, 64};
    std::vector<int> ac_hidden{128, 64};
  } network;

  OpponentConfig opponent;

  struct Evaluation {
    int interval = 1;  // generations between measurements; 0 disables
    int games = 100;
    /// Opponent for periodic evaluation; kind "" means the training opponent
    /// (uniform random when training by self-play).
    OpponentConfig opponent{"", 0.1, 50, "", false};
  } evaluation;

  struct Parallelism {
    int workers = 1;
    int inference_batch_limit = 32;
    double batch_timeout_ms = 2.0;
  } parallelism;
};

/// Parses YAML text. Unknown keys, type errors and invalid values raise ConfigError
/// with the offending key path, e.g. "run.yaml: search.budget: must be >= 1".
RunConfig parse_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Canonical YAML with every field; parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& config);

/// FNV-1a (hex) of the canonical dump with the run length and parallelism settings
/// removed, so a run can be extended or resumed on a different machine.
std::string config_hash(const RunConfig& config);

/// Throws ConfigError when a field violates its invariant.
void validate(const RunConfig& config, std::string_view source = "<config>");

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

GameRules make_rules(const RunConfig& config);
NetworkConfig make_network_config(const RunConfig& config);
SearchConfig make_search_config(const RunConfig& config);
CollectionConfig make_collection_config(const RunConfig& config);
UpdateConfig make_update_config(const RunConfig& config);

}  // namespace brexit
