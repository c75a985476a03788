#include "brexit/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "brexit/simd/kernels.hpp"

namespace brexit {

double gradient_norm(std::span<const double> g, double order) {
  if (std::isinf(order)) {
    double m = 0.0;
    for (double x : g) m = std::max(m, std::abs(x));
    return m;
  }
  if (!(order >= 1.0)) throw std::invalid_argument("gradient_norm: order must be >= 1");
  if (order == 2.0) return std::sqrt(simd::active().dot(g.data(), g.data(), g.size()));
  double s = 0.0;
  for (double x : g) s += std::pow(std::abs(x), order);
  return std::pow(s, 1.0 / order);
}

std::vector<double> clip_gradient_norm(std::span<const double> g, double threshold, double order) {
  if (!(threshold > 0.0)) throw std::invalid_argument("clip_gradient_norm: threshold must be positive");
  std::vector<double> out(g.begin(), g.end());
  const double norm = gradient_norm(g, order);
  if (norm > threshold) simd::active().scale(threshold / norm, out.data(), out.size());
  return out;
}

void adam_step(std::span<double> params, std::span<const double> gradient, double learning_rate, AdamState& state,
               const AdamHyper& hyper) {
  if (gradient.size() != params.size()) throw std::invalid_argument("adam_step: gradient size mismatch");
  for (std::size_t i = 0; i < gradient.size(); ++i)
    if (!std::isfinite(gradient[i]))
      throw std::invalid_argument("adam_step: non-finite gradient at index " + std::to_string(i));
  if (state.first_moment.empty() && state.second_moment.empty()) {
    state.first_moment.assign(params.size(), 0.0);
    state.second_moment.assign(params.size(), 0.0);
  }
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size())
    throw std::invalid_argument("adam_step: optimizer state does not match the parameters");

  ++state.step;
  const double t = static_cast<double>(state.step);
  simd::AdamCoefficients c;
  c.beta1 = hyper.beta1;
  c.beta2 = hyper.beta2;
  c.epsilon = hyper.epsilon;
  c.step_size = learning_rate / (1.0 - std::pow(hyper.beta1, t));
  c.v_correction = 1.0 / (1.0 - std::pow(hyper.beta2, t));
  simd::active().adam(c, gradient.data(), params.data(), state.first_moment.data(), state.second_moment.data(),
                      params.size());
}

}  // namespace brexit
