#include "brexit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace brexit::stats {

namespace {

void require_non_empty(std::span<const double> v, const char* what) {
  if (v.empty()) throw std::invalid_argument(std::string(what) + ": sample is empty");
}

std::vector<double> resample(std::span<const double> values, Rng& rng) {
  std::vector<double> out(values.size());
  for (double& v : out) v = values[uniform_index(rng, values.size())];
  return out;
}

Interval percentile_interval(std::vector<double>& draws, double level) {
  std::sort(draws.begin(), draws.end());
  const double tail = (1.0 - level) / 2.0;
  return {quantile_sorted(draws, tail), quantile_sorted(draws, 1.0 - tail)};
}

}  // namespace

double mean(std::span<const double> values) {
  require_non_empty(values, "mean");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double iqm(std::span<const double> values) {
  if (values.size() < 4) throw std::invalid_argument("iqm: needs at least 4 values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t cut = sorted.size() / 4;
  return mean(std::span<const double>(sorted).subspan(cut, sorted.size() - 2 * cut));
}

double quantile_sorted(std::span<const double> sorted, double q) {
  require_non_empty(sorted, "quantile");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must lie in [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || sorted[lo] == sorted[hi]) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Interval bootstrap_ci(std::span<const double> values, const Statistic& statistic, int n_resamples, double level,
                      Rng& rng) {
  require_non_empty(values, "bootstrap_ci");
  if (n_resamples < 100) throw std::invalid_argument("bootstrap_ci: needs at least 100 resamples");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap_ci: level must lie in (0, 1)");
  std::vector<double> draws(static_cast<std::size_t>(n_resamples));
  for (double& d : draws) d = statistic(resample(values, rng));
  return percentile_interval(draws, level);
}

double probability_of_improvement(std::span<const double> x, std::span<const double> y) {
  require_non_empty(x, "probability_of_improvement");
  require_non_empty(y, "probability_of_improvement");
  // Counted in half-units so the result is an exact ratio of integers.
  std::size_t half_wins = 0;
  for (double a : x)
    for (double b : y) half_wins += a > b ? 2 : (a == b ? 1 : 0);
  return static_cast<double>(half_wins) / (2.0 * static_cast<double>(x.size() * y.size()));
}

PoiResult probability_of_improvement(std::span<const double> x, std::span<const double> y, int bootstrap_n,
                                     Rng& rng, double level) {
  if (bootstrap_n < 1000) throw std::invalid_argument("probability_of_improvement: needs at least 1000 resamples");
  PoiResult result;
  result.poi = probability_of_improvement(x, y);
  std::vector<double> draws(static_cast<std::size_t>(bootstrap_n));
  for (double& d : draws) {
    const auto xs = resample(x, rng);
    const auto ys = resample(y, rng);
    d = probability_of_improvement(xs, ys);
  }
  result.ci = percentile_interval(draws, level);
  return result;
}

double kolmogorov_survival(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
  require_non_empty(x, "ks_two_sample");
  require_non_empty(y, "ks_two_sample");
  std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size(), m = b.size();

  // Sup distance between the ECDFs, evaluated after each distinct value.
  KsResult result;
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    const double v = j >= m || (i < n && a[i] <= b[j]) ? a[i] : b[j];
    while (i < n && a[i] == v) ++i;
    while (j < m && b[j] == v) ++j;
    const double diff = std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m);
    result.statistic = std::max(result.statistic, diff);
  }

  if (n <= 12 && m <= 12) {
    // Lattice paths through (i, j): step right for an x label, up for a y label, in
    // pooled sorted order. A path "stays inside" if every boundary between distinct
    // pooled values has |i/n - j/m| < D. p = 1 - inside / C(n + m, n).
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());
    const double d = result.statistic - 1e-12;
    std::vector<std::vector<double>> paths(n + 1, std::vector<double>(m + 1, 0.0));
    paths[0][0] = 1.0;
    for (std::size_t k = 1; k <= n + m; ++k) {
      const bool boundary = k == n + m || pooled[k - 1] < pooled[k];
      for (std::size_t ii = std::min(k, n) + 1; ii-- > 0;) {
        const std::size_t jj = k - ii;
        if (jj > m) continue;
        double count = 0.0;
        if (ii > 0) count += paths[ii - 1][jj];
        if (jj > 0) count += paths[ii][jj - 1];
        if (boundary && std::abs(static_cast<double>(ii) / n - static_cast<double>(jj) / m) >= d) count = 0.0;
        paths[ii][jj] = count;
      }
    }
    double total = 1.0;  // C(n + m, n)
    for (std::size_t k = 1; k <= n; ++k) total = total * static_cast<double>(m + k) / static_cast<double>(k);
    result.p_value = std::clamp(1.0 - paths[n][m] / std::round(total), 0.0, 1.0);
    result.exact = true;
    if (result.statistic == 0.0) result.p_value = 1.0;
    return result;
  }

  const double en = std::sqrt(static_cast<double>(n) * m / static_cast<double>(n + m));
  result.p_value = kolmogorov_survival((en + 0.12 + 0.11 / en) * result.statistic);
  return result;
}

}  // namespace brexit::stats
