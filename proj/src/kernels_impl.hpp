#pragma once

#include "tnli/kernels.hpp"

namespace tnli::kernels::detail {

extern const KernelTable kScalarTable;
#if defined(TNLI_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

}  // namespace tnli::kernels::detail
