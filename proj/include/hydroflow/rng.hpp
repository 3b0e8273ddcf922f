#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace hydroflow {

// Deterministic RNG built on raw mt19937_64 output with owned uniform and
// gaussian transforms. std::normal_distribution and friends produce
// implementation-defined sequences; synthesis and training promise
// bit-identical results for equal seeds, so the transforms are ours.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller; the second value of each pair is cached
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();  // log(0) guard
    double u2 = uniform();
    constexpr double two_pi = 6.283185307179586476925286766559;
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(two_pi * u2);
    have_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

  // uniform integer in [0, n), exact via rejection
  uint64_t uniform_index(uint64_t n) {
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % n;
  }

  // Fisher-Yates
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = size_t(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace hydroflow
