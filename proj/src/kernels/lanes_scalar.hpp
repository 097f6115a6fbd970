#pragma once

// Scalar lane type: one double, one 64-bit integer lane, bool masks. The
// overload set mirrors lanes_avx2.hpp so generic.hpp compiles against both.

#include <bit>
#include <cmath>
#include <cstdint>

namespace ebshrink::kernels {
namespace {

using SF = double;
using SU = std::uint64_t;
using SM = bool;

inline SF fmadd(SF a, SF b, SF c) { return std::fma(a, b, c); }
inline SF vsqrt(SF x) { return std::sqrt(x); }
inline SF vfloor(SF x) { return std::floor(x); }
inline SF vmin(SF a, SF b) { return a < b ? a : b; }
inline SF vmax(SF a, SF b) { return a > b ? a : b; }

inline SF select(SM m, SF a, SF b) { return m ? a : b; }
inline SU select(SM m, SU a, SU b) { return m ? a : b; }

inline SM mask_and(SM a, SM b) { return a && b; }
inline SM mask_or(SM a, SM b) { return a || b; }
inline SM mask_andnot(SM a, SM b) { return a && !b; }
inline bool all_of(SM m) { return m; }

inline SU as_bits(SF x) { return std::bit_cast<SU>(x); }
inline SF from_bits(SU x) { return std::bit_cast<SF>(x); }
inline SU mul32(SU a, SU b) { return (a & 0xffffffffULL) * (b & 0xffffffffULL); }
inline SM equal(SU a, SU b) { return a == b; }

}  // namespace
}  // namespace ebshrink::kernels
