#include "hydroflow/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "hydroflow/error.hpp"
#include "hydroflow/log.hpp"
#include "kernels_table.hpp"

namespace hydroflow::kern {

// ---------------------------------------------------------------------------
// scalar reference kernels
// ---------------------------------------------------------------------------
namespace {

double dot_scalar(const double* a, const double* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* a, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double sum_squares_scalar(const double* a, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

double squared_distance_scalar(const double* a, const double* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double scaled_squared_distance_scalar(const double* x, const double* c,
                                      const double* s, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double d = s[i] * (x[i] - c[i]);
    acc += d * d;
  }
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

namespace detail {
const KernelTable scalar_table = {
    dot_scalar,     sum_scalar,  sum_squares_scalar,
    squared_distance_scalar, scaled_squared_distance_scalar, axpy_scalar,
};
}  // namespace detail

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------
namespace {

const detail::KernelTable* table_for(Impl impl) {
  switch (impl) {
    case Impl::scalar:
      return &detail::scalar_table;
#if defined(HYDROFLOW_X86)
    case Impl::avx2:
      return &detail::avx2_table;
#endif
#if defined(HYDROFLOW_AARCH64)
    case Impl::neon:
      return &detail::neon_table;
#endif
    default:
      return nullptr;
  }
}

bool cpu_supports(Impl impl) {
  switch (impl) {
    case Impl::scalar:
      return true;
    case Impl::avx2:
#if defined(HYDROFLOW_X86)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Impl::neon:
#if defined(HYDROFLOW_AARCH64)
      return true;  // NEON is baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

Impl best_available() {
  if (cpu_supports(Impl::avx2)) return Impl::avx2;
  if (cpu_supports(Impl::neon)) return Impl::neon;
  return Impl::scalar;
}

Impl initial_choice() {
  const char* v = std::getenv("HYDROFLOW_KERNELS");
  if (v && std::strcmp(v, "auto") != 0) {
    Impl wanted;
    if (!std::strcmp(v, "scalar")) {
      wanted = Impl::scalar;
    } else if (!std::strcmp(v, "avx2")) {
      wanted = Impl::avx2;
    } else if (!std::strcmp(v, "neon")) {
      wanted = Impl::neon;
    } else {
      logx::warn("unrecognized HYDROFLOW_KERNELS=%s, using auto", v);
      return best_available();
    }
    if (cpu_supports(wanted)) return wanted;
    logx::warn("HYDROFLOW_KERNELS=%s not supported on this machine, using auto", v);
  }
  return best_available();
}

struct State {
  Impl impl;
  const detail::KernelTable* table;
  State() : impl(initial_choice()), table(table_for(impl)) {}
};

State& state() {
  static State s;
  return s;
}

}  // namespace

const char* impl_name(Impl impl) {
  switch (impl) {
    case Impl::scalar: return "scalar";
    case Impl::avx2: return "avx2";
    case Impl::neon: return "neon";
  }
  return "?";
}

bool supported(Impl impl) { return cpu_supports(impl); }

Impl active() { return state().impl; }

void force(Impl impl) {
  if (!cpu_supports(impl))
    fail(ErrorKind::param,
         std::string("kernel implementation not supported here: ") + impl_name(impl));
  state().impl = impl;
  state().table = table_for(impl);
}

void reset_to_auto() { force(best_available()); }

// ---------------------------------------------------------------------------
// public entry points
// ---------------------------------------------------------------------------
double dot(const double* a, const double* b, size_t n) {
  return state().table->dot(a, b, n);
}
double sum(const double* a, size_t n) { return state().table->sum(a, n); }
double sum_squares(const double* a, size_t n) {
  return state().table->sum_squares(a, n);
}
double squared_distance(const double* a, const double* b, size_t n) {
  return state().table->squared_distance(a, b, n);
}
double scaled_squared_distance(const double* x, const double* c,
                               const double* s, size_t n) {
  return state().table->scaled_squared_distance(x, c, s, n);
}
void axpy(double alpha, const double* x, double* y, size_t n) {
  state().table->axpy(alpha, x, y, n);
}

void matvec(const Matrix& W, const double* x, const double* bias, double* out) {
  const detail::KernelTable* t = state().table;
  for (size_t i = 0; i < W.rows; ++i)
    out[i] = t->dot(W.row(i), x, W.cols) + (bias ? bias[i] : 0.0);
}

void matvec_t(const Matrix& W, const double* g, double* out) {
  const detail::KernelTable* t = state().table;
  for (size_t j = 0; j < W.cols; ++j) out[j] = 0.0;
  for (size_t i = 0; i < W.rows; ++i) t->axpy(g[i], W.row(i), out, W.cols);
}

}  // namespace hydroflow::kern
