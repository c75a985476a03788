#include <cmath>

#include "brexit/simd/kernels.hpp"

namespace brexit::simd::detail {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void relu(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* activation, double* grad, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!(activation[i] > 0.0)) grad[i] = 0.0;
}

void scale(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void adam(const AdamCoefficients& c, const double* grad, double* params, double* m, double* v,
          std::size_t n) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_minus_b1 * g;
    v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
    const double denom = std::sqrt(v[i] * c.v_correction) + c.epsilon;
    params[i] -= c.step_size * (m[i] / denom);
  }
}

}  // namespace

const KernelTable kScalarTable{Isa::kScalar, dot, axpy, relu, relu_backward, scale, adam};

}  // namespace brexit::simd::detail
