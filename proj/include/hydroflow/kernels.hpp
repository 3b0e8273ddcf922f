#pragma once

#include <cstddef>

#include "hydroflow/linalg.hpp"

namespace hydroflow::kern {

// Scalar reference kernels plus SIMD variants selected at runtime. The active
// implementation is chosen once from CPU capabilities, overridable through
// HYDROFLOW_KERNELS={auto,scalar,avx2,neon} or force(). Every variant computes
// its reduction in a fixed order, so results are reproducible run to run on
// the same machine; scalar and SIMD variants agree to rounding (equivalence
// is tested, not assumed).
enum class Impl { scalar, avx2, neon };

const char* impl_name(Impl impl);
bool supported(Impl impl);
Impl active();
void force(Impl impl);  // param error if unsupported on this machine
void reset_to_auto();

double dot(const double* a, const double* b, size_t n);
double sum(const double* a, size_t n);
double sum_squares(const double* a, size_t n);
double squared_distance(const double* a, const double* b, size_t n);
// sum_i (s_i * (x_i - c_i))^2
double scaled_squared_distance(const double* x, const double* c,
                               const double* s, size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, size_t n);

// out = W x + bias (bias may be null), W row-major [rows x cols]
void matvec(const Matrix& W, const double* x, const double* bias, double* out);
// out = W^T g; out has W.cols entries and is overwritten
void matvec_t(const Matrix& W, const double* g, double* out);

}  // namespace hydroflow::kern
