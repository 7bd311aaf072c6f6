#pragma once

#include "mcmcperf/simd/dispatch.hpp"

namespace mcmcperf::simd::detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

Kernels make_scalar_kernels();

#if defined(MCMCPERF_HAVE_AVX2_TU)
Kernels make_avx2_kernels();
#endif

}  // namespace mcmcperf::simd::detail
