#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "brexit/trainer.hpp"

using namespace brexit;
namespace fs = std::filesystem;

namespace {

RunConfig smoke_config(const std::string& extra = "") {
  return parse_config(R"(
seed: 5
game: {height: 4, width: 5, connect_n: 3}
search: {budget: 8}
training:
  generations: 2
  episodes_per_generation: 10
  epochs: 1
  batch_size: 64
  buffer_capacity: 2000
evaluation: {interval: 1, games: 10}
)" + extra);
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("brexit_trainer_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const fs::path& p) {
  const std::string text = slurp(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("two-generation smoke run bookkeeping") {
  const auto dir = fresh_dir("smoke");
  Trainer trainer(smoke_config("opponent: {kind: self-play}\nmode: exit\n"), dir);
  std::vector<GenerationMetrics> rows;
  trainer.run([&](const GenerationMetrics& m) { rows.push_back(m); });
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].generation == 1);
  CHECK(rows[1].generation == 2);
  CHECK(trainer.population().size() == 2);
  CHECK(rows[1].population_size == 2);
  CHECK(rows[0].eval_winrate.has_value());
  CHECK(rows[0].eval_games == 10);
  CHECK(rows[0].update_steps >= 1);
  CHECK(rows[0].buffer_size == 2 * rows[0].samples);
  CHECK_FALSE(rows[0].policy_inference_loss.has_value());
  CHECK(count_lines(dir / "metrics.jsonl") == 2);
  CHECK(count_lines(dir / "metrics.csv") == 3);
  CHECK(count_lines(dir / "timing.jsonl") == 2);
  CHECK(fs::exists(trainer.checkpoint_path(1)));
  CHECK(fs::exists(trainer.checkpoint_path(2)));
  CHECK(latest_checkpoint(dir) == trainer.checkpoint_path(2));
  CHECK(load_config(dir / "config.yaml").training.generations == 2);
}

TEST_CASE("identical config and seed give identical metrics, for any worker count") {
  const auto a = fresh_dir("det_a");
  const auto b = fresh_dir("det_b");
  const auto c = fresh_dir("det_c");
  Trainer(smoke_config(), a).run();
  Trainer(smoke_config(), b).run();
  Trainer(smoke_config("parallelism: {workers: 3}\n"), c).run();
  CHECK(slurp(a / "metrics.jsonl") == slurp(b / "metrics.jsonl"));
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  CHECK(slurp(a / "metrics.jsonl") == slurp(c / "metrics.jsonl"));
  // Checkpoints embed the worker count, so compare their contents instead of bytes.
  const Checkpoint ca = load_checkpoint(a / "checkpoints/gen_0002.ckpt");
  const Checkpoint cc = load_checkpoint(c / "checkpoints/gen_0002.ckpt");
  CHECK(ca.parameters == cc.parameters);
  CHECK(ca.optimizer == cc.optimizer);
  CHECK(ca.replay_buffer == cc.replay_buffer);
  CHECK(ca.config_hash == cc.config_hash);
  CHECK(slurp(a / "metrics.jsonl").find("policy_inference_loss\":null") == std::string::npos);
}

TEST_CASE("resume continues exactly where the run stopped") {
  const auto full = fresh_dir("resume_full");
  Trainer(smoke_config(), full).run();

  const auto part = fresh_dir("resume_part");
  RunConfig one = smoke_config();
  one.training.generations = 1;
  Trainer(one, part).run();
  {
    // Simulate a crash that left a partial row behind after generation 1.
    std::ofstream junk(part / "metrics.jsonl", std::ios::app);
    junk << "{\"generation\": 2, \"partial\"\n";
  }
  auto resumed = Trainer::resume(part / "checkpoints/gen_0001.ckpt", part, smoke_config());
  CHECK(resumed->generation() == 1);
  resumed->run();
  CHECK(resumed->generation() == 2);
  CHECK(slurp(part / "metrics.jsonl") == slurp(full / "metrics.jsonl"));
  CHECK(slurp(part / "checkpoints/gen_0002.ckpt") == slurp(full / "checkpoints/gen_0002.ckpt"));

  // Without a config the embedded one is used.
  const auto again = fresh_dir("resume_again");
  auto from_embedded = Trainer::resume(full / "checkpoints/gen_0001.ckpt", again, std::nullopt);
  CHECK(from_embedded->generation() == 1);
  CHECK(from_embedded->config().training.generations == 2);
}

TEST_CASE("resume refuses a different configuration") {
  const auto dir = fresh_dir("refuse");
  RunConfig one = smoke_config();
  one.training.generations = 1;
  Trainer(one, dir).run();
  RunConfig changed = smoke_config();
  changed.search.budget = 9;
  CHECK_THROWS_WITH_AS(Trainer::resume(dir / "checkpoints/gen_0001.ckpt", dir, changed),
                       doctest::Contains("refusing to resume"), CheckpointError);
  {
    std::ofstream corrupt(dir / "checkpoints/gen_0001.ckpt", std::ios::binary | std::ios::trunc);
    corrupt << "garbage";
  }
  CHECK_THROWS_AS(Trainer::resume(dir / "checkpoints/gen_0001.ckpt", dir, std::nullopt), CheckpointError);
}

TEST_CASE("opponent-model modes log policy-inference losses") {
  const auto dir = fresh_dir("om");
  RunConfig c = smoke_config("mode: brexit-oms\nopponent: {kind: heuristic, epsilon: 0.3}\n");
  c.training.generations = 1;
  Trainer trainer(c, dir);
  const auto m = trainer.run_generation();
  CHECK(m.policy_inference_loss.has_value());
  CHECK(m.lambda.has_value());
}
