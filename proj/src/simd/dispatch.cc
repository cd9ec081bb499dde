#include <cstdlib>
#include <stdexcept>
#include <string>

#include "bezreach/simd/kernels.h"

namespace bezreach::simd {

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
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

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& kernels(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("SIMD variant '" + std::string(isa_name(isa)) +
                                "' is not available on this machine");
  }
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::kAvx2:
      return detail::kAvx2Table;
#endif
#if defined(__aarch64__)
    case Isa::kNeon:
      return detail::kNeonTable;
#endif
    default:
      return detail::kScalarTable;
  }
}

namespace {

const KernelTable& select_kernels() {
  if (const char* forced = std::getenv("BEZREACH_SIMD")) {
    const std::string name(forced);
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
      if (name == isa_name(isa) && isa_available(isa)) return kernels(isa);
    }
  }
  if (isa_available(Isa::kAvx2)) return kernels(Isa::kAvx2);
  if (isa_available(Isa::kNeon)) return kernels(Isa::kNeon);
  return kernels(Isa::kScalar);
}

}  // namespace

const KernelTable& kernels() {
  static const KernelTable& selected = select_kernels();
  return selected;
}

}  // namespace bezreach::simd
