#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "brexit/stats.hpp"

using namespace brexit;
using namespace brexit::stats;

namespace {

// Direct ECDF sup distance, evaluated at every pooled value.
double ks_distance(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> pooled(x);
  pooled.insert(pooled.end(), y.begin(), y.end());
  double d = 0.0;
  for (double t : pooled) {
    const double fx = static_cast<double>(std::count_if(x.begin(), x.end(), [t](double v) { return v <= t; })) / x.size();
    const double fy = static_cast<double>(std::count_if(y.begin(), y.end(), [t](double v) { return v <= t; })) / y.size();
    d = std::max(d, std::abs(fx - fy));
  }
  return d;
}

// Fraction of all relabelings of the pooled sample whose distance reaches the observed one.
double permutation_p_value(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> pooled(x);
  pooled.insert(pooled.end(), y.begin(), y.end());
  const double observed = ks_distance(x, y);
  const std::size_t n = pooled.size();
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(x.size()), true);
  std::size_t total = 0, extreme = 0;
  do {
    std::vector<double> a, b;
    for (std::size_t i = 0; i < n; ++i) (pick[i] ? a : b).push_back(pooled[i]);
    ++total;
    if (ks_distance(a, b) >= observed - 1e-12) ++extreme;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return static_cast<double>(extreme) / static_cast<double>(total);
}

double normal(Rng& rng) {
  // Box-Muller on the portable uniform source.
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

TEST_CASE("iqm definition") {
  const std::vector<double> v{8, 1, 7, 2, 6, 3, 5, 4};
  CHECK(iqm(v) == 4.5);
  CHECK(iqm(std::vector<double>{0.3, 0.3, 0.3, 0.3, 0.3}) == doctest::Approx(0.3));
  std::vector<double> ten{10, 1, 9, 2, 8, 3, 7, 4, 6, 5};
  CHECK(iqm(ten) == doctest::Approx((3 + 4 + 5 + 6 + 7 + 8) / 6.0));
  CHECK_THROWS_AS(iqm(std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST_CASE("iqm is permutation invariant and monotone") {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(4 + uniform_index(rng, 12));
    for (double& x : v) x = uniform01(rng);
    const double base = iqm(v);
    auto shuffled = v;
    for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[uniform_index(rng, i)]);
    CHECK(iqm(shuffled) == doctest::Approx(base).epsilon(1e-12));
    auto raised = v;
    raised[uniform_index(rng, raised.size())] += uniform01(rng);
    CHECK(iqm(raised) >= base - 1e-12);
  }
}

TEST_CASE("probability of improvement examples and complement") {
  CHECK(probability_of_improvement(std::vector<double>{1, 2}, std::vector<double>{0, 3}) == 0.5);
  CHECK(probability_of_improvement(std::vector<double>{0.4, 0.7}, std::vector<double>{0.4, 0.7}) == 0.5);
  Rng rng(9);
  const auto dominance = probability_of_improvement(std::vector<double>{5, 6, 7}, std::vector<double>{1, 2, 3}, 1000, rng);
  CHECK(dominance.poi == 1.0);
  CHECK(dominance.ci.lower == 1.0);
  CHECK(dominance.ci.upper == 1.0);
  CHECK_THROWS_AS(probability_of_improvement(std::vector<double>{1}, std::vector<double>{2}, 10, rng),
                  std::invalid_argument);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(1 + uniform_index(rng, 10)), y(1 + uniform_index(rng, 10));
    for (double& v : x) v = std::round(uniform01(rng) * 5) / 5;
    for (double& v : y) v = std::round(uniform01(rng) * 5) / 5;
    CHECK(probability_of_improvement(x, y) + probability_of_improvement(y, x) == 1.0);
  }
}

TEST_CASE("probability of improvement interval brackets the estimate") {
  Rng rng(4);
  const std::vector<double> x{0.6, 0.7, 0.8, 0.75, 0.65, 0.9};
  const std::vector<double> y{0.5, 0.6, 0.55, 0.7, 0.45, 0.62};
  const auto r = probability_of_improvement(x, y, 2000, rng);
  CHECK(r.ci.lower <= r.poi);
  CHECK(r.poi <= r.ci.upper);
  CHECK(r.ci.lower >= 0.0);
  CHECK(r.ci.upper <= 1.0);
}

TEST_CASE("ks two-sample statistic") {
  const auto same = ks_two_sample(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3});
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == 1.0);
  const auto disjoint = ks_two_sample(std::vector<double>{0, 0, 0}, std::vector<double>{1, 1, 1});
  CHECK(disjoint.statistic == 1.0);
  CHECK(disjoint.exact);
  CHECK(disjoint.p_value == doctest::Approx(0.1));  // 2 of 20 splits
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(1 + uniform_index(rng, 20)), y(1 + uniform_index(rng, 20));
    for (double& v : x) v = uniform01(rng);
    for (double& v : y) v = uniform01(rng) + 0.2;
    const auto xy = ks_two_sample(x, y);
    const auto yx = ks_two_sample(y, x);
    CHECK(xy.statistic == yx.statistic);
    CHECK(xy.statistic == doctest::Approx(ks_distance(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("exact ks p-values match the permutation oracle") {
  Rng rng(17);
  double worst = 0.0;
  for (int t = 0; t < 30; ++t) {
    std::vector<double> x(6), y(6);
    // Coarse grid values introduce ties in about half of the trials.
    const bool ties = t % 2 == 0;
    for (double& v : x) v = ties ? std::round(uniform01(rng) * 6) : uniform01(rng);
    for (double& v : y) v = ties ? std::round(uniform01(rng) * 6 + 1) : uniform01(rng) + 0.3;
    const auto r = ks_two_sample(x, y);
    REQUIRE(r.exact);
    worst = std::max(worst, std::abs(r.p_value - permutation_p_value(x, y)));
  }
  MESSAGE("max |exact - permutation| = " << worst);
  CHECK(worst < 0.02);
}

TEST_CASE("asymptotic ks for large samples") {
  Rng rng(3);
  std::vector<double> x(200), y(200);
  for (double& v : x) v = normal(rng);
  for (double& v : y) v = normal(rng);
  const auto null = ks_two_sample(x, y);
  CHECK_FALSE(null.exact);
  CHECK(null.p_value > 0.01);
  for (double& v : y) v += 1.0;
  CHECK(ks_two_sample(x, y).p_value < 1e-6);
  CHECK(kolmogorov_survival(0.0) == 1.0);
  CHECK(kolmogorov_survival(1.36) == doctest::Approx(0.049).epsilon(0.02));
}

TEST_CASE("bootstrap ci basics") {
  Rng rng(2);
  const std::vector<double> constant(10, 0.4);
  const auto c = bootstrap_ci(constant, mean, 500, 0.95, rng);
  CHECK(c.lower == doctest::Approx(0.4));
  CHECK(c.upper == doctest::Approx(0.4));
  std::vector<double> binary(30);
  for (double& v : binary) v = uniform01(rng) < 0.5 ? 0.0 : 1.0;
  const auto b = bootstrap_ci(binary, mean, 1000, 0.95, rng);
  CHECK(b.lower >= 0.0);
  CHECK(b.upper <= 1.0);
  CHECK(b.lower <= b.upper);
  Rng r1(8), r2(8);
  const auto p = bootstrap_ci(binary, mean, 300, 0.9, r1);
  const auto q = bootstrap_ci(binary, mean, 300, 0.9, r2);
  CHECK(p.lower == q.lower);
  CHECK(p.upper == q.upper);
  CHECK_THROWS_AS(bootstrap_ci(binary, mean, 50, 0.95, rng), std::invalid_argument);
  CHECK_THROWS_AS(bootstrap_ci(binary, mean, 500, 1.0, rng), std::invalid_argument);
}

TEST_CASE("bootstrap ci coverage for a known mean") {
  Rng rng(2024);
  int covered = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> sample(50);
    for (double& v : sample) v = 3.0 + 2.0 * normal(rng);
    const auto ci = bootstrap_ci(sample, mean, 1000, 0.95, rng);
    if (ci.lower <= 3.0 && 3.0 <= ci.upper) ++covered;
  }
  const double coverage = covered / static_cast<double>(trials);
  MESSAGE("coverage = " << coverage);
  CHECK(std::abs(coverage - 0.95) <= 0.04);
}

TEST_CASE("quantile interpolation") {
  const std::vector<double> v{0, 10, 20, 30};
  CHECK(quantile_sorted(v, 0.0) == 0.0);
  CHECK(quantile_sorted(v, 1.0) == 30.0);
  CHECK(quantile_sorted(v, 0.5) == doctest::Approx(15.0));
  CHECK_THROWS(quantile_sorted(v, 1.5));
}
