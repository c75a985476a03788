#include "brexit/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "brexit/rng.hpp"
#include "brexit/simd/kernels.hpp"

namespace brexit {

namespace {

void masked_softmax(std::span<const double> logits, std::span<const std::uint8_t> mask, std::span<double> out) {
  double max_logit = -INFINITY;
  for (std::size_t a = 0; a < logits.size(); ++a)
    if (mask[a]) max_logit = std::max(max_logit, logits[a]);
  double sum = 0.0;
  for (std::size_t a = 0; a < logits.size(); ++a) {
    out[a] = mask[a] ? std::exp(logits[a] - max_logit) : 0.0;
    sum += out[a];
  }
  for (double& p : out) p /= sum;
}

// Rows of `patches` are output positions; columns are (channel, ky, kx) taps.
void im2col(const std::vector<double>& x, int channels, int height, int width, std::vector<double>& patches) {
  const std::size_t taps = static_cast<std::size_t>(channels) * 9;
  patches.assign(static_cast<std::size_t>(height * width) * taps, 0.0);
  for (int y = 0; y < height; ++y)
    for (int xx = 0; xx < width; ++xx) {
      double* row = patches.data() + static_cast<std::size_t>(y * width + xx) * taps;
      for (int c = 0; c < channels; ++c)
        for (int ky = 0; ky < 3; ++ky) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= height) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int sx = xx + kx - 1;
            if (sx < 0 || sx >= width) continue;
            row[c * 9 + ky * 3 + kx] = x[(static_cast<std::size_t>(c) * height + sy) * width + sx];
          }
        }
    }
}

void col2im_add(const std::vector<double>& dpatches, int channels, int height, int width, std::vector<double>& dx) {
  const std::size_t taps = static_cast<std::size_t>(channels) * 9;
  for (int y = 0; y < height; ++y)
    for (int xx = 0; xx < width; ++xx) {
      const double* row = dpatches.data() + static_cast<std::size_t>(y * width + xx) * taps;
      for (int c = 0; c < channels; ++c)
        for (int ky = 0; ky < 3; ++ky) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= height) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int sx = xx + kx - 1;
            if (sx < 0 || sx >= width) continue;
            dx[(static_cast<std::size_t>(c) * height + sy) * width + sx] += row[c * 9 + ky * 3 + kx];
          }
        }
    }
}

}  // namespace

Network::Network(NetworkConfig config, std::uint64_t seed) : config_(std::move(config)) {
  if (config_.height < 1 || config_.width < 1 || config_.num_actions < 1)
    throw std::invalid_argument("network: invalid board or action dimensions");
  if (config_.conv_channels.empty()) throw std::invalid_argument("network: at least one convolution required");
  if (config_.num_opponent_heads < 0) throw std::invalid_argument("network: negative opponent head count");
  const std::size_t hw = static_cast<std::size_t>(config_.height * config_.width);

  int in = 3;
  for (std::size_t k = 0; k < config_.conv_channels.size(); ++k) {
    const int out = config_.conv_channels[k];
    if (out < 1) throw std::invalid_argument("network: channel counts must be positive");
    Conv conv;
    conv.in = in;
    conv.out = out;
    conv.relu = k + 1 < config_.conv_channels.size();
    conv.residual = k >= 1 && convs_[k - 1].in == out;
    const std::string prefix = "conv" + std::to_string(k);
    conv.w = add_block(prefix + ".weight", {static_cast<std::size_t>(out), static_cast<std::size_t>(in), 3, 3});
    conv.b = add_block(prefix + ".bias", {static_cast<std::size_t>(out)});
    convs_.push_back(conv);
    in = out;
  }
  trunk_features_ = static_cast<std::size_t>(in) * hw;

  auto make_dense = [&](const std::string& name, int fan_in, int fan_out) {
    if (fan_out < 1) throw std::invalid_argument("network: layer widths must be positive");
    Dense d;
    d.in = fan_in;
    d.out = fan_out;
    d.w = add_block(name + ".weight", {static_cast<std::size_t>(fan_out), static_cast<std::size_t>(fan_in)});
    d.b = add_block(name + ".bias", {static_cast<std::size_t>(fan_out)});
    return d;
  };

  const int features = static_cast<int>(trunk_features_);
  for (int j = 0; j < config_.num_opponent_heads; ++j) {
    std::vector<Dense> stack;
    int width = features;
    for (std::size_t l = 0; l < config_.om_hidden.size(); ++l) {
      stack.push_back(make_dense("om" + std::to_string(j) + ".fc" + std::to_string(l), width, config_.om_hidden[l]));
      width = config_.om_hidden[l];
    }
    stack.push_back(make_dense("om" + std::to_string(j) + ".out", width, config_.num_actions));
    om_stacks_.push_back(std::move(stack));
  }

  int width = features;
  if (!config_.om_hidden.empty()) width += config_.num_opponent_heads * config_.om_hidden.back();
  for (std::size_t l = 0; l < config_.ac_hidden.size(); ++l) {
    ac_stack_.push_back(make_dense("ac.fc" + std::to_string(l), width, config_.ac_hidden[l]));
    width = config_.ac_hidden[l];
  }
  actor_ = make_dense("actor", width, config_.num_actions);
  critic_ = make_dense("critic", width, 1);

  // He-uniform on convolutions and hidden layers, small uniform on output layers, zero biases.
  Rng rng(derive_seed(seed, 0x6e6574));
  auto fill = [&](std::size_t offset, std::size_t count, double limit) {
    for (std::size_t i = 0; i < count; ++i) params_[offset + i] = uniform(rng, -limit, limit);
  };
  for (const Conv& c : convs_) fill(c.w, static_cast<std::size_t>(c.out * c.in * 9), std::sqrt(6.0 / (c.in * 9)));
  auto fill_dense = [&](const Dense& d, double limit) { fill(d.w, static_cast<std::size_t>(d.out * d.in), limit); };
  for (const auto& stack : om_stacks_) {
    for (std::size_t l = 0; l + 1 < stack.size(); ++l) fill_dense(stack[l], std::sqrt(6.0 / stack[l].in));
    fill_dense(stack.back(), 0.01);
  }
  for (const Dense& d : ac_stack_) fill_dense(d, std::sqrt(6.0 / d.in));
  fill_dense(actor_, 0.01);
  fill_dense(critic_, 0.01);
  quantize_parameters();
}

std::size_t Network::add_block(const std::string& name, std::vector<std::size_t> shape) {
  std::size_t size = 1;
  for (std::size_t d : shape) size *= d;
  ParamBlock block{name, std::move(shape), params_.size(), size};
  layout_.push_back(block);
  params_.resize(params_.size() + size, 0.0);
  return block.offset;
}

const ParamBlock& Network::block(const std::string& name) const {
  for (const auto& b : layout_)
    if (b.name == name) return b;
  throw std::out_of_range("network has no parameter block '" + name + "'");
}

void Network::quantize_parameters() {
  for (double& p : params_) p = static_cast<double>(static_cast<float>(p));
}

void Network::check_input(const EncodedState& input, std::span<const std::uint8_t> legal_mask) const {
  if (input.channels != 3 || input.height != config_.height || input.width != config_.width ||
      input.data.size() != static_cast<std::size_t>(3 * config_.height * config_.width))
    throw std::invalid_argument("network: input shape does not match the configured board");
  if (legal_mask.size() != static_cast<std::size_t>(config_.num_actions))
    throw std::invalid_argument("network: legal mask has the wrong length");
  if (std::none_of(legal_mask.begin(), legal_mask.end(), [](std::uint8_t m) { return m != 0; }))
    throw std::invalid_argument("network: legal mask has no legal action");
}

void Network::dense_forward(const Dense& layer, const double* x, double* y) const {
  const auto& k = simd::active();
  const double* w = params_.data() + layer.w;
  const double* b = params_.data() + layer.b;
  for (int o = 0; o < layer.out; ++o) y[o] = b[o] + k.dot(w + static_cast<std::size_t>(o) * layer.in, x, layer.in);
}

void Network::dense_backward(const Dense& layer, const double* x, const double* dy, double* dx,
                             std::span<double> gradient) const {
  const auto& k = simd::active();
  const double* w = params_.data() + layer.w;
  double* gw = gradient.data() + layer.w;
  double* gb = gradient.data() + layer.b;
  for (int o = 0; o < layer.out; ++o) {
    if (dy[o] == 0.0) continue;
    const std::size_t row = static_cast<std::size_t>(o) * layer.in;
    k.axpy(dy[o], x, gw + row, layer.in);
    gb[o] += dy[o];
    if (dx != nullptr) k.axpy(dy[o], w + row, dx, layer.in);
  }
}

void Network::conv_forward(const Conv& layer, const std::vector<double>& x, std::vector<double>& pre,
                           std::vector<double>& patches) const {
  const auto& k = simd::active();
  const int hw = config_.height * config_.width;
  const std::size_t taps = static_cast<std::size_t>(layer.in) * 9;
  im2col(x, layer.in, config_.height, config_.width, patches);
  pre.resize(static_cast<std::size_t>(layer.out * hw));
  const double* w = params_.data() + layer.w;
  const double* b = params_.data() + layer.b;
  for (int co = 0; co < layer.out; ++co) {
    const double* wrow = w + static_cast<std::size_t>(co) * taps;
    double* out = pre.data() + static_cast<std::size_t>(co) * hw;
    for (int p = 0; p < hw; ++p) out[p] = b[co] + k.dot(wrow, patches.data() + static_cast<std::size_t>(p) * taps, taps);
  }
}

NetworkOutput Network::forward(const EncodedState& input, std::span<const std::uint8_t> legal_mask) const {
  thread_local ForwardCache cache;
  forward(input, legal_mask, cache);
  NetworkOutput out;
  out.actor = cache.actor_probs;
  out.critic = cache.critic;
  out.opponent_models = cache.om_probs;
  return out;
}

void Network::forward(const EncodedState& input, std::span<const std::uint8_t> legal_mask,
                      ForwardCache& cache) const {
  check_input(input, legal_mask);
  const auto& k = simd::active();
  cache.mask.assign(legal_mask.begin(), legal_mask.end());

  cache.trunk.resize(convs_.size() + 1);
  cache.trunk[0] = input.data;
  for (std::size_t l = 0; l < convs_.size(); ++l) {
    const Conv& conv = convs_[l];
    std::vector<double>& out = cache.trunk[l + 1];
    conv_forward(conv, cache.trunk[l], out, cache.patches);
    if (conv.residual) k.axpy(1.0, cache.trunk[l - 1].data(), out.data(), out.size());
    if (conv.relu) k.relu(out.data(), out.size());
  }
  const std::vector<double>& features = cache.trunk.back();

  const std::size_t heads = om_stacks_.size();
  cache.om_hidden.resize(heads);
  cache.om_probs.resize(heads);
  std::vector<double> logits(static_cast<std::size_t>(config_.num_actions));
  for (std::size_t j = 0; j < heads; ++j) {
    const auto& stack = om_stacks_[j];
    auto& hidden = cache.om_hidden[j];
    hidden.resize(stack.size() - 1);
    const double* x = features.data();
    for (std::size_t l = 0; l + 1 < stack.size(); ++l) {
      hidden[l].resize(static_cast<std::size_t>(stack[l].out));
      dense_forward(stack[l], x, hidden[l].data());
      k.relu(hidden[l].data(), hidden[l].size());
      x = hidden[l].data();
    }
    dense_forward(stack.back(), x, logits.data());
    cache.om_probs[j].resize(logits.size());
    masked_softmax(logits, legal_mask, cache.om_probs[j]);
  }

  cache.ac_input.assign(features.begin(), features.end());
  if (!config_.om_hidden.empty())
    for (std::size_t j = 0; j < heads; ++j)
      cache.ac_input.insert(cache.ac_input.end(), cache.om_hidden[j].back().begin(), cache.om_hidden[j].back().end());
  cache.ac_hidden.resize(ac_stack_.size());
  const double* x = cache.ac_input.data();
  for (std::size_t l = 0; l < ac_stack_.size(); ++l) {
    cache.ac_hidden[l].resize(static_cast<std::size_t>(ac_stack_[l].out));
    dense_forward(ac_stack_[l], x, cache.ac_hidden[l].data());
    k.relu(cache.ac_hidden[l].data(), cache.ac_hidden[l].size());
    x = cache.ac_hidden[l].data();
  }
  dense_forward(actor_, x, logits.data());
  cache.actor_probs.resize(logits.size());
  masked_softmax(logits, legal_mask, cache.actor_probs);
  double critic_pre = 0.0;
  dense_forward(critic_, x, &critic_pre);
  cache.critic = std::tanh(critic_pre);
}

void Network::backward(const ForwardCache& cache, const OutputGradients& grads, std::span<double> gradient) const {
  if (gradient.size() != params_.size()) throw std::invalid_argument("backward: gradient has the wrong size");
  const auto& k = simd::active();
  const std::size_t heads = om_stacks_.size();
  const std::size_t features = trunk_features_;

  // Actor-critic stack.
  const bool ac_active = !grads.actor_logits.empty() || grads.has_critic;
  std::vector<double> d_ac_input;
  if (ac_active) {
    const std::vector<double>& top = ac_stack_.empty() ? cache.ac_input : cache.ac_hidden.back();
    std::vector<double> d_top(top.size(), 0.0);
    if (!grads.actor_logits.empty()) dense_backward(actor_, top.data(), grads.actor_logits.data(), d_top.data(), gradient);
    if (grads.has_critic) {
      const double d_pre = grads.critic_output * (1.0 - cache.critic * cache.critic);
      dense_backward(critic_, top.data(), &d_pre, d_top.data(), gradient);
    }
    for (std::size_t l = ac_stack_.size(); l-- > 0;) {
      k.relu_backward(cache.ac_hidden[l].data(), d_top.data(), d_top.size());
      const std::vector<double>& below = l == 0 ? cache.ac_input : cache.ac_hidden[l - 1];
      std::vector<double> d_below(below.size(), 0.0);
      dense_backward(ac_stack_[l], below.data(), d_top.data(), d_below.data(), gradient);
      d_top = std::move(d_below);
    }
    d_ac_input = std::move(d_top);
  }

  std::vector<std::vector<double>> d_x(convs_.size() + 1);
  d_x.back().assign(features, 0.0);
  std::vector<double>& d_features = d_x.back();
  bool trunk_active = ac_active;
  if (ac_active) k.axpy(1.0, d_ac_input.data(), d_features.data(), features);

  // Opponent-model stacks.
  for (std::size_t j = 0; j < heads; ++j) {
    const auto& stack = om_stacks_[j];
    const auto& hidden = cache.om_hidden[j];
    const bool head_active = j < grads.om_logits.size() && !grads.om_logits[j].empty();
    const bool shares_features = ac_active && !config_.om_hidden.empty();
    if (!head_active && !shares_features) continue;
    trunk_active = true;
    const std::vector<double>& top_in = hidden.empty() ? cache.trunk.back() : hidden.back();
    std::vector<double> d_top(top_in.size(), 0.0);
    if (shares_features) {
      const std::size_t width = static_cast<std::size_t>(config_.om_hidden.back());
      k.axpy(1.0, d_ac_input.data() + features + j * width, d_top.data(), width);
    }
    if (head_active) dense_backward(stack.back(), top_in.data(), grads.om_logits[j].data(), d_top.data(), gradient);
    if (hidden.empty()) {
      k.axpy(1.0, d_top.data(), d_features.data(), features);
      continue;
    }
    for (std::size_t l = hidden.size(); l-- > 0;) {
      k.relu_backward(hidden[l].data(), d_top.data(), d_top.size());
      const std::vector<double>& below = l == 0 ? cache.trunk.back() : hidden[l - 1];
      std::vector<double> d_below(below.size(), 0.0);
      dense_backward(stack[l], below.data(), d_top.data(), d_below.data(), gradient);
      d_top = std::move(d_below);
    }
    k.axpy(1.0, d_top.data(), d_features.data(), features);
  }
  if (!trunk_active) return;

  // Convolutional trunk.
  const int hw = config_.height * config_.width;
  std::vector<double> patches;
  std::vector<double> d_patches;
  for (std::size_t l = convs_.size(); l-- > 0;) {
    const Conv& conv = convs_[l];
    std::vector<double> d_pre = d_x[l + 1];
    if (conv.relu) k.relu_backward(cache.trunk[l + 1].data(), d_pre.data(), d_pre.size());
    if (conv.residual) {
      auto& d_skip = d_x[l - 1];
      if (d_skip.empty()) d_skip.assign(cache.trunk[l - 1].size(), 0.0);
      k.axpy(1.0, d_pre.data(), d_skip.data(), d_pre.size());
    }
    const std::size_t taps = static_cast<std::size_t>(conv.in) * 9;
    im2col(cache.trunk[l], conv.in, config_.height, config_.width, patches);
    const double* w = params_.data() + conv.w;
    double* gw = gradient.data() + conv.w;
    double* gb = gradient.data() + conv.b;
    const bool need_input_grad = l > 0;
    if (need_input_grad) d_patches.assign(patches.size(), 0.0);
    for (int co = 0; co < conv.out; ++co) {
      const double* dp = d_pre.data() + static_cast<std::size_t>(co) * hw;
      double* gw_row = gw + static_cast<std::size_t>(co) * taps;
      const double* w_row = w + static_cast<std::size_t>(co) * taps;
      double bias_grad = 0.0;
      for (int p = 0; p < hw; ++p) {
        if (dp[p] == 0.0) continue;
        bias_grad += dp[p];
        k.axpy(dp[p], patches.data() + static_cast<std::size_t>(p) * taps, gw_row, taps);
        if (need_input_grad) k.axpy(dp[p], w_row, d_patches.data() + static_cast<std::size_t>(p) * taps, taps);
      }
      gb[co] += bias_grad;
    }
    if (need_input_grad) {
      auto& d_in = d_x[l];
      if (d_in.empty()) d_in.assign(cache.trunk[l].size(), 0.0);
      col2im_add(d_patches, conv.in, config_.height, config_.width, d_in);
    }
  }
}

NetworkConfig network_config_for(const GameRules& rules, AblationMode mode, std::vector<int> conv_channels,
                                 std::vector<int> om_hidden, std::vector<int> ac_hidden) {
  NetworkConfig cfg;
  cfg.height = rules.height();
  cfg.width = rules.width();
  cfg.num_actions = rules.num_actions();
  cfg.conv_channels = std::move(conv_channels);
  cfg.om_hidden = std::move(om_hidden);
  cfg.ac_hidden = std::move(ac_hidden);
  cfg.num_opponent_heads = uses_opponent_models(mode) ? 1 : 0;
  return cfg;
}

}  // namespace brexit
