#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace hydroflow {

bool is_power_of_two(size_t n);

// In-place iterative radix-2 FFT. Length must be a power of two (param
// error). inverse=true applies the 1/n scale.
void fft(std::vector<std::complex<double>>& x, bool inverse = false);

// Real-input FFT via the packed half-length complex transform; returns the
// n/2 + 1 non-redundant bins. n must be a power of two >= 2.
std::vector<std::complex<double>> rfft(const double* x, size_t n);

}  // namespace hydroflow
