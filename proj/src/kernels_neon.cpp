// NEON kernel variants (aarch64, where NEON is baseline). Mirrors the AVX2
// unit with 2-wide double lanes.
#if defined(HYDROFLOW_AARCH64)

#include <arm_neon.h>

#include <cstddef>

#include "kernels_table.hpp"

namespace hydroflow::kern::detail {

namespace {

double dot_neon(const double* a, const double* b, size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  for (; i + 2 <= n; i += 2)
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_neon(const double* a, size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) acc0 = vaddq_f64(acc0, vld1q_f64(a + i));
  double acc = vaddvq_f64(acc0);
  for (; i < n; ++i) acc += a[i];
  return acc;
}

double sum_squares_neon(const double* a, size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(a + i);
    acc0 = vfmaq_f64(acc0, v, v);
  }
  double acc = vaddvq_f64(acc0);
  for (; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

double squared_distance_neon(const double* a, const double* b, size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc0 = vfmaq_f64(acc0, d, d);
  }
  double acc = vaddvq_f64(acc0);
  for (; i < n; ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double scaled_squared_distance_neon(const double* x, const double* c,
                                    const double* s, size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t d = vmulq_f64(
        vld1q_f64(s + i), vsubq_f64(vld1q_f64(x + i), vld1q_f64(c + i)));
    acc0 = vfmaq_f64(acc0, d, d);
  }
  double acc = vaddvq_f64(acc0);
  for (; i < n; ++i) {
    double d = s[i] * (x[i] - c[i]);
    acc += d * d;
  }
  return acc;
}

void axpy_neon(double alpha, const double* x, double* y, size_t n) {
  float64x2_t va = vdupq_n_f64(alpha);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
    vst1q_f64(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable neon_table = {
    dot_neon,     sum_neon,  sum_squares_neon,
    squared_distance_neon, scaled_squared_distance_neon, axpy_neon,
};

}  // namespace hydroflow::kern::detail

#endif  // HYDROFLOW_AARCH64
