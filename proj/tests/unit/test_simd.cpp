#include <cmath>
#include <vector>

#include "brexit/rng.hpp"
#include "brexit/simd/kernels.hpp"
#include "doctest.h"

using namespace brexit;
using simd::Isa;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng, -2.0, 2.0);
  return v;
}

// Lengths cover empty input, sub-vector tails and multi-vector bodies.
constexpr std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 63, 64, 65, 1000};

}  // namespace

TEST_CASE("scalar table is always available") {
  CHECK(simd::supported(Isa::kScalar));
  CHECK(simd::table(Isa::kScalar).isa == Isa::kScalar);
  CHECK(simd::name(Isa::kAvx2) == "avx2");
  MESSAGE("active kernels: " << simd::name(simd::active().isa));
}

TEST_CASE("vector kernels agree with the scalar reference") {
  const simd::KernelTable& ref = simd::table(Isa::kScalar);
  for (Isa isa : {Isa::kAvx2, Isa::kNeon}) {
    if (!simd::supported(isa)) {
      MESSAGE("skipping " << simd::name(isa) << ": not supported on this machine");
      CHECK_THROWS(simd::table(isa));
      continue;
    }
    const simd::KernelTable& k = simd::table(isa);
    CAPTURE(simd::name(isa));
    Rng rng(99);
    for (std::size_t n : kLengths) {
      CAPTURE(n);
      const auto a = random_vector(rng, n);
      const auto b = random_vector(rng, n);

      double scale = 0.0;
      for (std::size_t i = 0; i < n; ++i) scale += std::abs(a[i] * b[i]);
      CHECK(std::abs(k.dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= 1e-14 * (scale + 1.0));

      auto y1 = b, y2 = b;
      k.axpy(0.37, a.data(), y1.data(), n);
      ref.axpy(0.37, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-15 * (std::abs(y2[i]) + 1.0));

      auto r1 = a, r2 = a;
      k.relu(r1.data(), n);
      ref.relu(r2.data(), n);
      CHECK(r1 == r2);

      auto g1 = b, g2 = b;
      k.relu_backward(r2.data(), g1.data(), n);
      ref.relu_backward(r2.data(), g2.data(), n);
      CHECK(g1 == g2);

      auto s1 = a, s2 = a;
      k.scale(-1.5, s1.data(), n);
      ref.scale(-1.5, s2.data(), n);
      CHECK(s1 == s2);

      // Adam is bitwise identical: no fused operations in either variant.
      simd::AdamCoefficients c{0.9, 0.999, 1e-8, 1e-3 / (1 - 0.9), 1 / (1 - 0.999)};
      auto p1 = a, p2 = a;
      auto m1 = random_vector(rng, n), m2 = m1;
      std::vector<double> v1(n), v2;
      for (double& x : v1) x = uniform(rng, 0.0, 1.0);
      v2 = v1;
      k.adam(c, b.data(), p1.data(), m1.data(), v1.data(), n);
      ref.adam(c, b.data(), p2.data(), m2.data(), v2.data(), n);
      CHECK(p1 == p2);
      CHECK(m1 == m2);
      CHECK(v1 == v2);
    }
  }
}

TEST_CASE("relu treats NaN and signed zero like the reference") {
  const simd::KernelTable& ref = simd::table(Isa::kScalar);
  const simd::KernelTable& k = simd::active();
  std::vector<double> x{-0.0, 0.0, std::nan(""), -1.0, 1.0, 2.0, -3.0, 4.0, 5.0};
  auto a = x, b = x;
  k.relu(a.data(), a.size());
  ref.relu(b.data(), b.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::signbit(a[i]) == std::signbit(b[i]));
    CHECK((a[i] == b[i] || (std::isnan(a[i]) && std::isnan(b[i]))));
  }
}
