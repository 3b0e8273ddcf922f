#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hydroflow/audio.hpp"
#include "hydroflow/linalg.hpp"

namespace hydroflow {

// Floor added inside every log() over energies.
inline constexpr double kLogFloor = 1e-10;

enum class FeatureMethod { stft, dwt, mfcc, fbank };

const char* method_name(FeatureMethod m);
FeatureMethod method_from_name(const std::string& name);  // param error
size_t method_dim(FeatureMethod m);  // stft 513, dwt 64, mfcc 40, fbank 134
FeatureMethod method_from_dim(size_t dim);  // param error when ambiguous/unknown

struct FeatureVector {
  std::vector<double> values;
  FeatureMethod method = FeatureMethod::fbank;
};

struct Spectrogram {
  Matrix mag;  // n_subframes x (win_len/2 + 1) magnitudes
  double sample_rate_hz = 44100.0;
  size_t win_len = 1024;
  size_t hop = 512;
};

// Hann-windowed short-time spectrum over sliding sub-frames; a trailing
// partial sub-frame is dropped. win_len must be a power of two (the FFT
// constraint) and the frame must span at least one window.
Spectrogram stft(const double* frame, size_t n, double sample_rate_hz,
                 size_t win_len = 1024, size_t hop = 512);

// Temporal mean of log power spectra -> 513 values.
FeatureVector stft_features(const double* frame, size_t n, double sample_rate_hz);

// 44 log-mel energies + deltas + delta-deltas + log-energy + delta
// log-energy, mean-pooled over sub-frames -> 134 values.
FeatureVector fbank_features(const double* frame, size_t n, double sample_rate_hz);

// Orthonormal DCT-II cepstra 1..13 of the 44 log-mels (+ deltas,
// delta-deltas), mean pooled, plus mean log-energy -> 40 values.
FeatureVector mfcc_features(const double* frame, size_t n, double sample_rate_hz);

// Full Haar wavelet-packet decomposition, depth 6, over the longest
// power-of-two prefix; 64 frequency-ordered leaf log-energies.
FeatureVector dwt_features(const double* frame, size_t n);

FeatureVector extract_features(FeatureMethod m, const double* frame, size_t n,
                               double sample_rate_hz);
Matrix extract_features(FeatureMethod m, const FrameSeries& fs);

// --- building blocks, exposed so their contracts can be tested directly ---

double hz_to_mel(double hz);   // 2595 log10(1 + hz/700)
double mel_to_hz(double mel);

struct MelFilter {
  size_t first_bin = 0;
  std::vector<double> weights;
};

// Triangular filters with corners equally spaced on the mel scale over
// [0, sample_rate/2], evaluated at FFT bin centers.
std::vector<MelFilter> mel_filterbank(size_t n_filters, size_t n_bins,
                                      double sample_rate_hz, size_t win_len);

// Orthonormal DCT-II matrix (n x n): rows are basis vectors, D D^T = I.
Matrix dct2_orthonormal(size_t n);

// Regression deltas over rows (time) with +-2 context and edge replication.
Matrix delta_features(const Matrix& seq);

// Depth-`depth` Haar packet leaf energies (sum of squared coefficients per
// leaf), frequency ordered. n must be >= 2^depth; only the longest
// power-of-two prefix is transformed.
std::vector<double> haar_packet_energies(const double* x, size_t n, int depth);

// --- per-dimension standardization -----------------------------------------

struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;  // population std, clamped below at 1e-8
  FeatureMethod method = FeatureMethod::fbank;
};

NormStats fit_norm(const Matrix& X, FeatureMethod method);  // >= 2 rows
void apply_norm(const NormStats& stats, double* v, size_t dim);
Matrix apply_norm(const NormStats& stats, const Matrix& X);

}  // namespace hydroflow
