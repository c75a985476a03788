// AArch64 only; Advanced SIMD is part of the base ISA there.
#include <arm_neon.h>

#include <cmath>

#include "brexit/simd/kernels.hpp"

namespace brexit::simd::detail {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void relu(double* x, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(x + i);
    const uint64x2_t keep = vcgtq_f64(v, zero);
    vst1q_f64(x + i, vreinterpretq_f64_u64(vandq_u64(vreinterpretq_u64_f64(v), keep)));
  }
  for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* activation, double* grad, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t keep = vcgtq_f64(vld1q_f64(activation + i), zero);
    const uint64x2_t g = vreinterpretq_u64_f64(vld1q_f64(grad + i));
    vst1q_f64(grad + i, vreinterpretq_f64_u64(vandq_u64(g, keep)));
  }
  for (; i < n; ++i)
    if (!(activation[i] > 0.0)) grad[i] = 0.0;
}

void scale(double alpha, double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void adam(const AdamCoefficients& c, const double* grad, double* params, double* m, double* v,
          std::size_t n) {
  const float64x2_t b1 = vdupq_n_f64(c.beta1);
  const float64x2_t b2 = vdupq_n_f64(c.beta2);
  const float64x2_t omb1 = vdupq_n_f64(1.0 - c.beta1);
  const float64x2_t omb2 = vdupq_n_f64(1.0 - c.beta2);
  const float64x2_t vcorr = vdupq_n_f64(c.v_correction);
  const float64x2_t eps = vdupq_n_f64(c.epsilon);
  const float64x2_t step = vdupq_n_f64(c.step_size);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t g = vld1q_f64(grad + i);
    const float64x2_t mi = vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)), vmulq_f64(omb1, g));
    const float64x2_t vi = vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)), vmulq_f64(omb2, vmulq_f64(g, g)));
    vst1q_f64(m + i, mi);
    vst1q_f64(v + i, vi);
    const float64x2_t denom = vaddq_f64(vsqrtq_f64(vmulq_f64(vi, vcorr)), eps);
    vst1q_f64(params + i, vsubq_f64(vld1q_f64(params + i), vmulq_f64(step, vdivq_f64(mi, denom))));
  }
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  for (; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_minus_b1 * g;
    v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
    const double denom = std::sqrt(v[i] * c.v_correction) + c.epsilon;
    params[i] -= c.step_size * (m[i] / denom);
  }
}

}  // namespace

const KernelTable kNeonTable{Isa::kNeon, dot, axpy, relu, relu_backward, scale, adam};

}  // namespace brexit::simd::detail
