#include <cstdlib>
#include <stdexcept>
#include <string>

#include "brexit/simd/kernels.hpp"

namespace brexit::simd {

namespace {

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  if (const char* forced = std::getenv("BREXIT_ISA"); forced != nullptr && *forced != '\0') {
    const std::string want(forced);
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon})
      if (want == name(isa)) return table(isa);
    throw std::runtime_error("BREXIT_ISA: unknown instruction set '" + want + "'");
  }
  if (supported(Isa::kAvx2)) return table(Isa::kAvx2);
  if (supported(Isa::kNeon)) return table(Isa::kNeon);
  return table(Isa::kScalar);
}

}  // namespace

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return cpu_has_avx2();
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) throw std::runtime_error("instruction set not available: " + std::string(name(isa)));
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::kAvx2: return detail::kAvx2Table;
#endif
#if defined(__aarch64__)
    case Isa::kNeon: return detail::kNeonTable;
#endif
    default: return detail::kScalarTable;
  }
}

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

}  // namespace brexit::simd
