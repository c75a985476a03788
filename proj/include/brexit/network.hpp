#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brexit/game.hpp"
#include "brexit/sample.hpp"

namespace brexit {

/// Architecture of the apprentice.
///
/// Trunk: 3x3 convolutions (stride 1, padding 1), the first mapping the three
/// input planes to conv_channels[0]. A skip connection spans every pair of
/// consecutive layers: the input of layer k-1 is added to the pre-activation of
/// layer k whenever the channel counts agree. All trunk layers use ReLU except
/// the last, which is a linear embedding.
///
/// Heads: each opponent-model head owns a ReLU stack (om_hidden) and a softmax
/// output. The actor-critic stack (ac_hidden) reads the trunk embedding
/// concatenated with the last hidden layer of every opponent-model head, then
/// splits into a softmax actor and a tanh critic.
struct NetworkConfig {
  int height = 6;
  int width = 7;
  int num_actions = 7;
  std::vector<int> conv_channels{12, 15, 20, 20, 20, 1};
  std::vector<int> om_hidden{128, 64};
  std::vector<int> ac_hidden{128, 64};
  int num_opponent_heads = 1;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct ParamBlock {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

struct NetworkOutput {
  std::vector<double> actor;
  double critic = 0.0;
  std::vector<std::vector<double>> opponent_models;
};

/// Per-sample activations kept for the backward pass. Reusable across calls.
struct ForwardCache {
  std::vector<std::vector<double>> trunk;  // trunk[0] = input, trunk[k+1] = output of conv k
  std::vector<double> patches;             // scratch for im2col
  std::vector<std::vector<std::vector<double>>> om_hidden;
  std::vector<std::vector<double>> om_probs;
  std::vector<double> ac_input;
  std::vector<std::vector<double>> ac_hidden;
  std::vector<double> actor_probs;
  double critic = 0.0;
  std::vector<std::uint8_t> mask;
};

/// Gradients flowing into the network outputs for one sample.
struct OutputGradients {
  std::span<const double> actor_logits;                  // empty: no gradient
  double critic_output = 0.0;                            // dL/dV after tanh
  bool has_critic = false;
  std::vector<std::span<const double>> om_logits;        // per head, empty: no gradient
};

class Network {
 public:
  Network(NetworkConfig config, std::uint64_t seed);

  const NetworkConfig& config() const { return config_; }
  const std::vector<ParamBlock>& layout() const { return layout_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }
  const ParamBlock& block(const std::string& name) const;

  /// Rounds every parameter to the nearest single-precision value.
  void quantize_parameters();

  /// Throws std::invalid_argument on shape mismatch or an all-false mask.
  NetworkOutput forward(const EncodedState& input, std::span<const std::uint8_t> legal_mask) const;

  void forward(const EncodedState& input, std::span<const std::uint8_t> legal_mask,
               ForwardCache& cache) const;
  /// Accumulates parameter gradients into `gradient` (same layout as parameters()).
  void backward(const ForwardCache& cache, const OutputGradients& grads, std::span<double> gradient) const;

 private:
  struct Conv {
    int in = 0, out = 0;
    bool residual = false;
    bool relu = true;
    std::size_t w = 0, b = 0;
  };
  struct Dense {
    int in = 0, out = 0;
    std::size_t w = 0, b = 0;
  };

  std::size_t add_block(const std::string& name, std::vector<std::size_t> shape);
  void check_input(const EncodedState& input, std::span<const std::uint8_t> legal_mask) const;
  void dense_forward(const Dense& layer, const double* x, double* y) const;
  void dense_backward(const Dense& layer, const double* x, const double* dy, double* dx,
                      std::span<double> gradient) const;
  void conv_forward(const Conv& layer, const std::vector<double>& x, std::vector<double>& pre,
                    std::vector<double>& patches) const;

  NetworkConfig config_;
  std::vector<ParamBlock> layout_;
  std::vector<double> params_;
  std::vector<Conv> convs_;
  std::vector<std::vector<Dense>> om_stacks_;  // hidden layers then output layer
  std::vector<Dense> ac_stack_;
  Dense actor_;
  Dense critic_;
  std::size_t trunk_features_ = 0;
};

/// Builds the network configuration matching a board and an ablation mode.
NetworkConfig network_config_for(const GameRules& rules, AblationMode mode,
                                 std::vector<int> conv_channels = {12, 15, 20, 20, 20, 1},
                                 std::vector<int> om_hidden = {128, 64},
                                 std::vector<int> ac_hidden = {128, 64});

// ---------------------------------------------------------------------------
// Losses

inline constexpr double kLambdaEpsilon = 1e-8;

struct LossBreakdown {
  double value_loss = 0.0;
  double policy_loss = 0.0;
  std::optional<double> policy_inference_loss;
  std::optional<double> lambda;
  double total = 0.0;
};

/// kPolicyInferenceOnly optimises L_PI alone (used to train opponent models in isolation).
enum class Objective { kTotal, kPolicyInferenceOnly };

struct GradientResult {
  LossBreakdown losses;
  std::vector<double> gradient;
};

/// L_v: mean squared critic error. L_pi: mean actor cross-entropy to the search policy.
/// L_PI: cross-entropy of each opponent-model head to its targets, averaged over all
/// opponent records in the batch. With opponent models, lambda = 1/sqrt(L_PI + eps)
/// and L_total = lambda (L_v + L_pi) + L_PI; a batch with no opponent records uses
/// lambda = 1 and L_PI = 0. Without them L_total = L_v + L_pi.
LossBreakdown compute_losses(const Network& net, const GameRules& rules, std::span<const TrainingSample> batch,
                             AblationMode mode, Objective objective = Objective::kTotal);

/// Exact gradient of the selected objective, including the dependence of lambda on L_PI.
/// `threads` only affects speed; the result is identical for any value.
GradientResult backward(const Network& net, const GameRules& rules, std::span<const TrainingSample> batch,
                        AblationMode mode, Objective objective = Objective::kTotal, int threads = 1);

}  // namespace brexit
