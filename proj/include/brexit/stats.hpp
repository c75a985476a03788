#pragma once

#include <functional>
#include <span>
#include <vector>

#include "brexit/rng.hpp"

namespace brexit::stats {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Sorts, drops floor(n/4) values from each end and averages the rest. Needs n >= 4.
double iqm(std::span<const double> values);

/// Linear-interpolation quantile of sorted data, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

using Statistic = std::function<double(std::span<const double>)>;

double mean(std::span<const double> values);

/// Percentile bootstrap interval of `statistic` over resamples drawn with replacement.
Interval bootstrap_ci(std::span<const double> values, const Statistic& statistic, int n_resamples, double level,
                      Rng& rng);

/// Mean over all pairs of [x_i > y_j] + 0.5 [x_i == y_j].
double probability_of_improvement(std::span<const double> x, std::span<const double> y);

struct PoiResult {
  double poi = 0.0;
  Interval ci;
};

/// Point estimate plus a percentile bootstrap interval resampling x and y independently.
PoiResult probability_of_improvement(std::span<const double> x, std::span<const double> y, int bootstrap_n,
                                     Rng& rng, double level = 0.95);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool exact = false;
};

/// Two-sided two-sample Kolmogorov-Smirnov test. For n, m <= 12 the p-value is the
/// exact permutation probability P(D >= d) over all label assignments of the pooled
/// sample (ties handled by evaluating the ECDFs only between distinct values);
/// larger samples use the asymptotic Kolmogorov distribution.
KsResult ks_two_sample(std::span<const double> x, std::span<const double> y);

/// Kolmogorov survival function Q(lambda) = 2 sum_k (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

}  // namespace brexit::stats
