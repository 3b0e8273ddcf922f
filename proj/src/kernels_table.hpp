#pragma once

#include <cstddef>

// Internal: one function-pointer table per implementation. SIMD variants live
// in their own translation units compiled with the matching ISA flags.
namespace hydroflow::kern::detail {

struct KernelTable {
  double (*dot)(const double*, const double*, size_t);
  double (*sum)(const double*, size_t);
  double (*sum_squares)(const double*, size_t);
  double (*squared_distance)(const double*, const double*, size_t);
  double (*scaled_squared_distance)(const double*, const double*,
                                    const double*, size_t);
  void (*axpy)(double, const double*, double*, size_t);
};

extern const KernelTable scalar_table;

#if defined(HYDROFLOW_X86)
extern const KernelTable avx2_table;
#endif
#if defined(HYDROFLOW_AARCH64)
extern const KernelTable neon_table;
#endif

}  // namespace hydroflow::kern::detail
