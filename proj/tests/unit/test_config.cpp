#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "brexit/config.hpp"

using namespace brexit;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_config(text, "run.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty config gives the documented defaults") {
  const RunConfig c = parse_config("");
  CHECK(c.search.budget == 50);
  CHECK(c.search.c_puct == 2.0);
  CHECK(c.training.batch_size == 512);
  CHECK(c.training.episodes_per_generation == 800);
  CHECK(c.training.epochs == 5);
  CHECK(c.search.temperature_plies == 10);
  CHECK(c.training.learning_rate == 1.5e-3);
  CHECK(c.training.grad_clip == 1.0);
  CHECK(c.training.value_target == ValueTargetVariant::kChosenQ);
  CHECK(c.training.gamma == 1.0);
  CHECK(c.game == GameConfig{6, 7, 4, true});
  CHECK(c.mode == AblationMode::kBRExIt);
  CHECK(c.parallelism.workers == 1);
}

TEST_CASE("overrides are applied") {
  const RunConfig c = parse_config(R"(
seed: 42
game: {height: 4, width: 5, connect_n: 3}
mode: exit
search:
  budget: 30
  rollout: true
training:
  value_target: greedy-q
  learning_rate: 1e-3
network:
  conv_channels: [8, 8, 1]
opponent:
  kind: heuristic
  epsilon: 0.2
)");
  CHECK(c.seed == 42);
  CHECK(c.game.width == 5);
  CHECK(c.mode == AblationMode::kExIt);
  CHECK(c.search.budget == 30);
  CHECK(c.search.rollout);
  CHECK(c.training.value_target == ValueTargetVariant::kGreedyQ);
  CHECK(c.training.learning_rate == 1e-3);
  CHECK(c.network.conv_channels == std::vector<int>{8, 8, 1});
  CHECK(c.opponent.kind == "heuristic");
  CHECK(c.opponent.epsilon == 0.2);
  CHECK(make_search_config(c).leaf == LeafEvaluation::kRandomRollout);
  CHECK(make_network_config(c).num_opponent_heads == 0);
}

TEST_CASE("config errors name the offending key") {
  CHECK(error_of("search:\n  budgte: 3\n") == "run.yaml: search.budgte: unknown key");
  CHECK(error_of("trainig: {}\n") == "run.yaml: trainig: unknown key");
  CHECK(error_of("search: {budget: 0}\n") == "run.yaml: search.budget: must be >= 1");
  CHECK(error_of("search: {budget: lots}\n").find("search.budget: expected an integer") != std::string::npos);
  CHECK(error_of("mode: alphazero\n").find("run.yaml: mode:") == 0);
  CHECK(error_of("game: {height: 1, width: 1, connect_n: 4}\n").find("run.yaml: game:") == 0);
  CHECK(error_of("opponent: {kind: checkpoint}\n") == "run.yaml: opponent.path: required for checkpoint opponents");
  CHECK(error_of("evaluation: {opponent: {kind: self-play}}\n").find("evaluation.opponent.kind") != std::string::npos);
  CHECK(error_of("search: [1, 2]\n") == "run.yaml: search: expected a mapping");
  CHECK(error_of("search: {budget: [1\n").find("parse error") != std::string::npos);
  CHECK(error_of("training: {gamma: 0}\n") == "run.yaml: training.gamma: must lie in (0, 1]");
}

TEST_CASE("dump round trip and hash") {
  RunConfig c = parse_config("seed: 7\ntraining: {learning_rate: 0.1, gamma: 0.99}\nopponent: {kind: mcts, budget: 12}\n");
  const std::string text = dump_config(c);
  const RunConfig back = parse_config(text);
  CHECK(dump_config(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);

  RunConfig longer = c;
  longer.training.generations += 10;
  longer.parallelism.workers = 8;
  CHECK(config_hash(longer) == config_hash(c));
  RunConfig other_seed = c;
  other_seed.seed = 8;
  CHECK(config_hash(other_seed) != config_hash(c));
  RunConfig other_budget = c;
  other_budget.search.budget = 51;
  CHECK(config_hash(other_budget) != config_hash(c));
}

TEST_CASE("load_config reads files") {
  const auto path = std::filesystem::temp_directory_path() / "brexit_test_config.yaml";
  {
    std::ofstream out(path);
    out << "search: {budget: 30}\n";
  }
  CHECK(load_config(path).search.budget == 30);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(path), ConfigError);
}
