#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "brexit/checkpoint.hpp"
#include "brexit/config.hpp"
#include "brexit/inference_service.hpp"
#include "brexit/network.hpp"
#include "brexit/optimizer.hpp"
#include "brexit/training.hpp"

namespace brexit {

/// One row of the metrics log. Contains no wall-clock data, so identical runs
/// produce identical logs; timings go to timing.jsonl.
struct GenerationMetrics {
  int generation = 0;
  std::string config_hash;
  int episodes = 0;
  std::size_t samples = 0;          // agent decisions collected (before augmentation)
  std::size_t buffer_size = 0;
  std::size_t update_steps = 0;
  double value_loss = 0.0;          // means over the generation's update steps
  double policy_loss = 0.0;
  std::optional<double> policy_inference_loss;
  std::optional<double> lambda;
  double total_loss = 0.0;
  double train_winrate = 0.0;       // collection episodes, draws count half
  std::optional<double> eval_winrate;
  int eval_games = 0;
  std::size_t population_size = 0;

  std::string to_json() const;
  static std::string csv_header();
  std::string to_csv() const;
};

struct GenerationTiming {
  double collect_seconds = 0.0;
  double update_seconds = 0.0;
  double eval_seconds = 0.0;
};

/// Alternates episode collection and apprentice updates. Every generation's randomness
/// is derived from (seed, purpose, generation, episode), and collected episodes enter the
/// buffer in episode order, so runs are reproducible for any worker count and a resumed
/// run continues exactly as an uninterrupted one.
///
/// Output directory layout:
///   config.yaml, metrics.jsonl, metrics.csv, timing.jsonl,
///   checkpoints/gen_NNNN.ckpt, checkpoints/latest (file name of the newest checkpoint)
class Trainer {
 public:
  Trainer(RunConfig config, std::filesystem::path out_dir);

  /// Restores a run from a checkpoint. If `config` is given its hash must match the
  /// checkpoint's; its generation count and parallelism settings take effect.
  static std::unique_ptr<Trainer> resume(const std::filesystem::path& checkpoint, std::filesystem::path out_dir,
                                         const std::optional<RunConfig>& config);

  ~Trainer();

  /// Runs one generation, writes its metrics row and checkpoint.
  GenerationMetrics run_generation();
  /// Runs until config.training.generations generations are complete.
  void run(const std::function<void(const GenerationMetrics&)>& on_generation = {});

  int generation() const { return generation_; }
  const RunConfig& config() const { return config_; }
  const Network& network() const { return *network_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const SelfPlayPopulation& population() const { return population_; }
  const std::filesystem::path& out_dir() const { return out_dir_; }

  Checkpoint make_checkpoint() const;
  std::filesystem::path checkpoint_path(int generation) const;

 private:
  struct ResumeTag {};
  Trainer(ResumeTag, RunConfig config, std::filesystem::path out_dir, const Checkpoint& checkpoint);

  void init_outputs(bool resuming);
  double evaluate(int generation, int& games);
  void write_outputs(const GenerationMetrics& m, const GenerationTiming& t);

  RunConfig config_;
  std::string hash_;
  GameRules rules_;
  std::filesystem::path out_dir_;
  std::shared_ptr<Network> network_;
  AdamState optimizer_;
  ReplayBuffer buffer_;
  SelfPlayPopulation population_;
  std::shared_ptr<const Policy> fixed_opponent_;
  std::shared_ptr<const Policy> eval_opponent_;
  std::unique_ptr<InferenceService> service_;
  int generation_ = 0;
};

/// Newest checkpoint recorded in `out_dir`, if any.
std::optional<std::filesystem::path> latest_checkpoint(const std::filesystem::path& out_dir);

/// Seed purposes mixed into derive_seed.
enum SeedPurpose : std::uint64_t { kSeedInit = 1, kSeedCollect = 2, kSeedUpdate = 3, kSeedEval = 4 };

}  // namespace brexit
