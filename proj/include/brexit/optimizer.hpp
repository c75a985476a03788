#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace brexit {

/// ||g||_n for n >= 1; n = infinity gives the max norm.
double gradient_norm(std::span<const double> g, double order = 2.0);

/// Returns g unchanged when ||g||_n <= c, otherwise c * g / ||g||_n.
std::vector<double> clip_gradient_norm(std::span<const double> g, double threshold, double order = 2.0);

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step = 0;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam step in place. Throws std::invalid_argument on a non-finite
/// gradient (parameters and state are left untouched) or on size mismatch.
void adam_step(std::span<double> params, std::span<const double> gradient, double learning_rate, AdamState& state,
               const AdamHyper& hyper = {});

}  // namespace brexit
