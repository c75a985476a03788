#pragma once

// Data-parallel kernels behind the apprentice network and its optimizer.
//
// Every kernel has a scalar reference implementation. Vector variants (AVX2+FMA
// on x86-64, NEON on AArch64) are compiled into separate translation units and
// picked at startup from the CPU's capabilities. Set BREXIT_ISA=scalar|avx2|neon
// to override the choice.

#include <cstddef>
#include <string_view>

namespace brexit::simd {

enum class Isa { kScalar, kAvx2, kNeon };

struct AdamCoefficients {
  double beta1;
  double beta2;
  double epsilon;
  double step_size;     // learning rate scaled by the first-moment bias correction
  double v_correction;  // 1 / (1 - beta2^t)
};

struct KernelTable {
  Isa isa;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// x[i] = max(x[i], 0)
  void (*relu)(double* x, std::size_t n);
  /// grad[i] = 0 where activation[i] <= 0
  void (*relu_backward)(const double* activation, double* grad, std::size_t n);
  /// x[i] *= alpha
  void (*scale)(double alpha, double* x, std::size_t n);
  /// Bias-corrected Adam update of params, first and second moments.
  void (*adam)(const AdamCoefficients& c, const double* grad, double* params, double* m, double* v,
               std::size_t n);
};

bool supported(Isa isa);
/// Kernel table for a specific instruction set; throws if the CPU or build lacks it.
const KernelTable& table(Isa isa);
/// Table chosen at startup.
const KernelTable& active();

std::string_view name(Isa isa);

namespace detail {
extern const KernelTable kScalarTable;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable kAvx2Table;
#endif
#if defined(__aarch64__)
extern const KernelTable kNeonTable;
#endif
}  // namespace detail

}  // namespace brexit::simd
