#include "hydroflow/fft.hpp"

#include <cmath>
#include <map>

#include "hydroflow/error.hpp"

namespace hydroflow {

bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Bit-reversal permutation and twiddle factors, cached per size. Stages with
// butterfly span `len` index the table with stride n/len.
struct Plan {
  std::vector<size_t> bitrev;
  std::vector<std::complex<double>> w;  // w[j] = exp(-2*pi*i*j/n), j < n/2
};

const Plan& plan_for(size_t n) {
  static std::map<size_t, Plan> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  Plan p;
  p.bitrev.resize(n);
  size_t bits = 0;
  while ((size_t(1) << bits) < n) ++bits;
  for (size_t i = 0; i < n; ++i) {
    size_t r = 0;
    for (size_t b = 0; b < bits; ++b)
      if (i & (size_t(1) << b)) r |= size_t(1) << (bits - 1 - b);
    p.bitrev[i] = r;
  }
  p.w.resize(n / 2);
  for (size_t j = 0; j < n / 2; ++j) {
    double a = -kTwoPi * double(j) / double(n);
    p.w[j] = {std::cos(a), std::sin(a)};
  }
  return cache.emplace(n, std::move(p)).first->second;
}

}  // namespace

void fft(std::vector<std::complex<double>>& x, bool inverse) {
  size_t n = x.size();
  if (!is_power_of_two(n))
    fail(ErrorKind::param, "fft length must be a power of two");
  if (n == 1) return;

  const Plan& plan = plan_for(n);
  for (size_t i = 0; i < n; ++i) {
    size_t j = plan.bitrev[i];
    if (i < j) std::swap(x[i], x[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    size_t half = len >> 1;
    size_t stride = n / len;
    for (size_t base = 0; base < n; base += len) {
      for (size_t k = 0; k < half; ++k) {
        std::complex<double> w = plan.w[k * stride];
        if (inverse) w = std::conj(w);
        std::complex<double> u = x[base + k];
        std::complex<double> v = x[base + k + half] * w;
        x[base + k] = u + v;
        x[base + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    double scale = 1.0 / double(n);
    for (auto& v : x) v *= scale;
  }
}

std::vector<std::complex<double>> rfft(const double* x, size_t n) {
  if (!is_power_of_two(n) || n < 2)
    fail(ErrorKind::param, "rfft length must be a power of two >= 2");

  size_t m = n / 2;
  std::vector<std::complex<double>> z(m);
  for (size_t k = 0; k < m; ++k) z[k] = {x[2 * k], x[2 * k + 1]};
  fft(z);

  // Untangle the even/odd interleave: for k in [0, m],
  //   X_k = (Z_k + conj(Z_{m-k}))/2 - (i/2) e^{-2*pi*i*k/n} (Z_k - conj(Z_{m-k}))
  // with Z index taken mod m.
  std::vector<std::complex<double>> out(m + 1);
  const std::complex<double> half(0.5, 0.0);
  const std::complex<double> neg_half_i(0.0, -0.5);
  for (size_t k = 0; k <= m; ++k) {
    std::complex<double> zk = z[k % m];
    std::complex<double> zmk = std::conj(z[(m - k) % m]);
    double a = -kTwoPi * double(k) / double(n);
    std::complex<double> tw(std::cos(a), std::sin(a));
    out[k] = half * (zk + zmk) + neg_half_i * tw * (zk - zmk);
  }
  return out;
}

}  // namespace hydroflow
