#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "brexit/game.hpp"
#include "brexit/mcts.hpp"
#include "brexit/network.hpp"
#include "brexit/optimizer.hpp"
#include "brexit/policy.hpp"
#include "brexit/rng.hpp"
#include "brexit/sample.hpp"

namespace brexit {

/// How the stored value target z mixes the episode return G with search statistics.
///   kRootValue: z = (sum_a pi(a) Q(s,a) + G) / 2
///   kGreedyQ:   z = (max_a Q(s,a) + G) / 2
///   kChosenQ:   z = (Q(s, argmax_a N(s,a)) + G) / 2
///   kNone:      z = G
enum class ValueTargetVariant { kRootValue, kGreedyQ, kChosenQ, kNone };

std::string_view to_string(ValueTargetVariant variant);
ValueTargetVariant parse_value_target_variant(std::string_view text);

/// Result is clamped to [-1, 1]. `mcts_policy` is only read by kRootValue.
double blend_value_target(const RootStatistics& root, std::span<const double> mcts_policy, double episode_return,
                          ValueTargetVariant variant);

/// Search prior configuration used by the expert in each ablation mode.
PriorMode prior_mode_for(AblationMode mode);

struct CollectionConfig {
  AblationMode mode = AblationMode::kBRExIt;
  OpponentTargetEncoding target_encoding = OpponentTargetEncoding::kFullDistribution;
  SearchConfig search;
  int temperature_plies = 10;  // tau_explore while fewer plies have been played
  double tau_explore = 1.0;
  double tau_exploit = 0.01;
  ValueTargetVariant value_target = ValueTargetVariant::kChosenQ;
  double gamma = 1.0;
};

struct EpisodeResult {
  std::vector<TrainingSample> samples;
  int agent_seat = 0;
  std::optional<int> winner;
  double agent_return = 0.0;
  int plies = 0;
};

/// Plays one episode of the learning agent (expert search over `apprentice`) against
/// `opponent`, with the agent's seat drawn uniformly. Every agent turn yields one sample;
/// opponent turns that follow it are recorded as its opponent records when the mode
/// trains opponent models. Throws std::runtime_error naming the seat if the opponent
/// picks an illegal action.
EpisodeResult collect_episode(const GameRules& rules, const Evaluator& apprentice, const Policy& opponent,
                              const CollectionConfig& config, Rng& rng);

/// (sample, mirrored sample): states and opponent states mirrored, distributions
/// mirrored, value target unchanged.
std::pair<TrainingSample, TrainingSample> augment_symmetry(const GameRules& rules, const TrainingSample& sample);

/// Bounded FIFO of training samples with oldest-first eviction.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  /// Appends a sample and its mirrored twin together.
  void insert_augmented(const GameRules& rules, const TrainingSample& sample);
  /// Appends samples verbatim (used when restoring a buffer).
  void push(TrainingSample sample);

  std::size_t size() const { return samples_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t insertions() const { return insertions_; }
  const std::deque<TrainingSample>& samples() const { return samples_; }
  const TrainingSample& operator[](std::size_t i) const { return samples_[i]; }

  std::vector<std::uint8_t> to_bytes(const GameRules& rules) const;
  static ReplayBuffer from_bytes(const GameRules& rules, std::span<const std::uint8_t> bytes);

 private:
  void make_room(std::size_t incoming);

  std::size_t capacity_;
  std::deque<TrainingSample> samples_;
  std::uint64_t insertions_ = 0;
};

struct UpdateConfig {
  AblationMode mode = AblationMode::kBRExIt;
  Objective objective = Objective::kTotal;
  int epochs = 5;
  int batch_size = 512;
  double learning_rate = 1.5e-3;
  double grad_clip = 1.0;
  int threads = 1;
};

/// Per epoch: shuffles the buffer, walks it in minibatches (the last one may be
/// smaller), clips the gradient norm and takes one Adam step per minibatch.
/// Returns one LossBreakdown per step, evaluated before the step.
std::vector<LossBreakdown> update_apprentice(Network& network, AdamState& optimizer, const GameRules& rules,
                                             const ReplayBuffer& buffer, const UpdateConfig& config, Rng& rng);

/// Frozen apprentice snapshots for delta = 0 uniform self-play.
class SelfPlayPopulation {
 public:
  void add(std::shared_ptr<const Network> snapshot) { snapshots_.push_back(std::move(snapshot)); }
  std::size_t size() const { return snapshots_.size(); }
  bool empty() const { return snapshots_.empty(); }
  const std::shared_ptr<const Network>& operator[](std::size_t i) const { return snapshots_[i]; }
  std::size_t sample_index(Rng& rng) const;

 private:
  std::vector<std::shared_ptr<const Network>> snapshots_;
};

/// Policy acting with a uniformly drawn snapshot's actor head. An empty population
/// falls back to `current` (the live apprentice) and logs the fallback.
std::shared_ptr<const Policy> sample_selfplay_opponent(const SelfPlayPopulation& population,
                                                       std::shared_ptr<const Network> current,
                                                       const GameRules& rules, Rng& rng);

/// Fisher-Yates shuffle driven by uniform_index, so orders match across standard libraries.
void shuffle_indices(std::vector<std::size_t>& indices, Rng& rng);

// ---------------------------------------------------------------------------
// Dataset export: one JSON header line describing the schema, then one sample per line.

void write_dataset(std::ostream& out, const GameRules& rules, std::span<const TrainingSample> samples);
std::vector<TrainingSample> read_dataset(std::istream& in, const GameRules& rules);

}  // namespace brexit
