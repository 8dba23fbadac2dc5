#pragma once

#include "wavecs/simd/kernels.hpp"

namespace wavecs::simd::detail {

extern const KernelTable kScalarTable;
#if defined(WAVECS_HAVE_AVX2_TU)
extern const KernelTable kAvx2Table;
#endif

}  // namespace wavecs::simd::detail
