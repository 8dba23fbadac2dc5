#include <cstdlib>
#include <string_view>

#include "tables.hpp"

namespace wavecs::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(WAVECS_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() noexcept {
  if (const char* env = std::getenv("WAVECS_SIMD"); env && std::string_view(env) == "scalar") {
    return detail::kScalarTable;
  }
  if (const KernelTable* t = avx2_kernels()) return *t;
  return detail::kScalarTable;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

const KernelTable& kernels() noexcept {
  static const KernelTable& table = select();
  return table;
}

const KernelTable& scalar_kernels() noexcept { return detail::kScalarTable; }

const KernelTable* avx2_kernels() noexcept {
#if defined(WAVECS_HAVE_AVX2_TU)
  static const bool ok = cpu_has_avx2();
  return ok ? &detail::kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

}  // namespace wavecs::simd
