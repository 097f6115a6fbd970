#pragma once

#include "ebshrink/kernels.hpp"

namespace ebshrink::kernels {

const KernelTable& scalar_table();
#if defined(EBSHRINK_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

}  // namespace ebshrink::kernels
