#include "hydroflow/features.hpp"

#include <cmath>
#include <cstring>
#include <map>

#include "hydroflow/error.hpp"
#include "hydroflow/fft.hpp"
#include "hydroflow/kernels.hpp"

namespace hydroflow {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr size_t kMelFilters = 44;
constexpr size_t kCepstra = 13;  // DCT coefficients 1..13
constexpr int kWaveletDepth = 6;

const std::vector<double>& hann_window(size_t n) {
  static std::map<size_t, std::vector<double>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(kTwoPi * double(i) / double(n));
  return cache.emplace(n, std::move(w)).first->second;
}

size_t num_subframes(size_t n, size_t win_len, size_t hop) {
  if (n < win_len) return 0;
  return (n - win_len) / hop + 1;
}

// 85x44 log-mel energies and the 85 raw log-energies for one frame
void log_mel_matrix(const double* frame, size_t n, double sr, Matrix& logmel,
                    std::vector<double>& loge) {
  const size_t win_len = 1024, hop = 512;
  Spectrogram spec = stft(frame, n, sr, win_len, hop);
  size_t t_steps = spec.mag.rows;
  size_t n_bins = spec.mag.cols;

  const auto& bank = mel_filterbank(kMelFilters, n_bins, sr, win_len);
  logmel = Matrix(t_steps, kMelFilters);
  loge.resize(t_steps);

  std::vector<double> power(n_bins);
  for (size_t t = 0; t < t_steps; ++t) {
    const double* m = spec.mag.row(t);
    for (size_t k = 0; k < n_bins; ++k) power[k] = m[k] * m[k];
    for (size_t f = 0; f < kMelFilters; ++f) {
      const MelFilter& mf = bank[f];
      double e = kern::dot(power.data() + mf.first_bin, mf.weights.data(),
                           mf.weights.size());
      logmel.at(t, f) = std::log(e + kLogFloor);
    }
    // raw (unwindowed) sub-frame energy
    double e = kern::sum_squares(frame + t * hop, win_len);
    loge[t] = std::log(e + kLogFloor);
  }
}

void mean_over_rows(const Matrix& m, double* out) {
  for (size_t j = 0; j < m.cols; ++j) out[j] = 0.0;
  for (size_t i = 0; i < m.rows; ++i) kern::axpy(1.0, m.row(i), out, m.cols);
  for (size_t j = 0; j < m.cols; ++j) out[j] /= double(m.rows);
}

double mean_of(const std::vector<double>& v) {
  return kern::sum(v.data(), v.size()) / double(v.size());
}

}  // namespace

const char* method_name(FeatureMethod m) {
  switch (m) {
    case FeatureMethod::stft: return "stft";
    case FeatureMethod::dwt: return "dwt";
    case FeatureMethod::mfcc: return "mfcc";
    case FeatureMethod::fbank: return "fbank";
  }
  return "?";
}

FeatureMethod method_from_name(const std::string& name) {
  if (name == "stft") return FeatureMethod::stft;
  if (name == "dwt") return FeatureMethod::dwt;
  if (name == "mfcc") return FeatureMethod::mfcc;
  if (name == "fbank") return FeatureMethod::fbank;
  fail(ErrorKind::param, "unknown feature method: " + name);
}

size_t method_dim(FeatureMethod m) {
  switch (m) {
    case FeatureMethod::stft: return 513;
    case FeatureMethod::dwt: return 64;
    case FeatureMethod::mfcc: return 40;
    case FeatureMethod::fbank: return 134;
  }
  return 0;
}

FeatureMethod method_from_dim(size_t dim) {
  for (FeatureMethod m : {FeatureMethod::stft, FeatureMethod::dwt,
                          FeatureMethod::mfcc, FeatureMethod::fbank})
    if (method_dim(m) == dim) return m;
  fail(ErrorKind::param,
       "no feature method has dimension " + std::to_string(dim));
}

Spectrogram stft(const double* frame, size_t n, double sample_rate_hz,
                 size_t win_len, size_t hop) {
  if (!is_power_of_two(win_len))
    fail(ErrorKind::param, "win_len must be a power of two");
  if (hop == 0) fail(ErrorKind::param, "hop must be positive");
  size_t t_steps = num_subframes(n, win_len, hop);
  if (t_steps == 0)
    fail(ErrorKind::param, "frame shorter than one analysis window");

  const auto& w = hann_window(win_len);
  Spectrogram spec;
  spec.sample_rate_hz = sample_rate_hz;
  spec.win_len = win_len;
  spec.hop = hop;
  spec.mag = Matrix(t_steps, win_len / 2 + 1);

  std::vector<double> windowed(win_len);
  for (size_t t = 0; t < t_steps; ++t) {
    const double* x = frame + t * hop;
    for (size_t i = 0; i < win_len; ++i) windowed[i] = w[i] * x[i];
    auto bins = rfft(windowed.data(), win_len);
    double* out = spec.mag.row(t);
    for (size_t k = 0; k < bins.size(); ++k) out[k] = std::abs(bins[k]);
  }
  return spec;
}

FeatureVector stft_features(const double* frame, size_t n,
                            double sample_rate_hz) {
  Spectrogram spec = stft(frame, n, sample_rate_hz);
  size_t n_bins = spec.mag.cols;
  FeatureVector fv;
  fv.method = FeatureMethod::stft;
  fv.values.assign(n_bins, 0.0);
  for (size_t t = 0; t < spec.mag.rows; ++t) {
    const double* m = spec.mag.row(t);
    for (size_t k = 0; k < n_bins; ++k)
      fv.values[k] += std::log(m[k] * m[k] + kLogFloor);
  }
  for (double& v : fv.values) v /= double(spec.mag.rows);
  return fv;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<MelFilter> mel_filterbank(size_t n_filters, size_t n_bins,
                                      double sample_rate_hz, size_t win_len) {
  static std::map<std::tuple<size_t, size_t, double, size_t>,
                  std::vector<MelFilter>>
      cache;
  auto key = std::make_tuple(n_filters, n_bins, sample_rate_hz, win_len);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  // n_filters + 2 corner frequencies, equally spaced in mel over [0, sr/2]
  double mel_hi = hz_to_mel(sample_rate_hz / 2.0);
  std::vector<double> corners(n_filters + 2);
  for (size_t i = 0; i < corners.size(); ++i)
    corners[i] = mel_to_hz(mel_hi * double(i) / double(n_filters + 1));

  std::vector<MelFilter> bank(n_filters);
  double bin_hz = sample_rate_hz / double(win_len);
  for (size_t f = 0; f < n_filters; ++f) {
    double lo = corners[f], mid = corners[f + 1], hi = corners[f + 2];
    size_t first = n_bins, last = 0;
    std::vector<double> w;
    for (size_t k = 0; k < n_bins; ++k) {
      double fk = double(k) * bin_hz;
      double v = 0.0;
      if (fk > lo && fk < hi)
        v = fk <= mid ? (fk - lo) / (mid - lo) : (hi - fk) / (hi - mid);
      if (v > 0.0) {
        if (first == n_bins) first = k;
        last = k;
      }
    }
    if (first == n_bins) {  // extremely narrow filter: keep an empty support
      first = 0;
    } else {
      w.resize(last - first + 1);
      for (size_t k = first; k <= last; ++k) {
        double fk = double(k) * bin_hz;
        w[k - first] =
            fk <= mid ? (fk - lo) / (mid - lo) : (hi - fk) / (hi - mid);
      }
    }
    bank[f] = MelFilter{first, std::move(w)};
  }
  return cache.emplace(key, std::move(bank)).first->second;
}

Matrix dct2_orthonormal(size_t n) {
  Matrix d(n, n);
  double scale0 = std::sqrt(1.0 / double(n));
  double scale = std::sqrt(2.0 / double(n));
  for (size_t k = 0; k < n; ++k)
    for (size_t j = 0; j < n; ++j)
      d.at(k, j) = (k == 0 ? scale0 : scale) *
                   std::cos(kTwoPi / 2.0 * (2.0 * j + 1.0) * k / (2.0 * n));
  return d;
}

Matrix delta_features(const Matrix& seq) {
  // d_t = sum_{k=1,2} k (c_{t+k} - c_{t-k}) / (2 (1^2 + 2^2)), indices clamped
  Matrix d(seq.rows, seq.cols);
  long rows = long(seq.rows);
  auto clamp = [rows](long t) { return t < 0 ? 0 : (t >= rows ? rows - 1 : t); };
  for (long t = 0; t < rows; ++t) {
    double* out = d.row(size_t(t));
    for (size_t j = 0; j < seq.cols; ++j) {
      double acc = 0.0;
      for (long k = 1; k <= 2; ++k)
        acc += double(k) * (seq.at(size_t(clamp(t + k)), j) -
                            seq.at(size_t(clamp(t - k)), j));
      out[j] = acc / 10.0;
    }
  }
  return d;
}

FeatureVector fbank_features(const double* frame, size_t n,
                             double sample_rate_hz) {
  Matrix logmel;
  std::vector<double> loge;
  log_mel_matrix(frame, n, sample_rate_hz, logmel, loge);

  Matrix d1 = delta_features(logmel);
  Matrix d2 = delta_features(d1);
  Matrix loge_m(loge.size(), 1);
  for (size_t t = 0; t < loge.size(); ++t) loge_m.at(t, 0) = loge[t];
  Matrix dloge = delta_features(loge_m);

  FeatureVector fv;
  fv.method = FeatureMethod::fbank;
  fv.values.resize(3 * kMelFilters + 2);
  mean_over_rows(logmel, fv.values.data());
  mean_over_rows(d1, fv.values.data() + kMelFilters);
  mean_over_rows(d2, fv.values.data() + 2 * kMelFilters);
  fv.values[3 * kMelFilters] = mean_of(loge);
  double dsum = 0.0;
  for (size_t t = 0; t < dloge.rows; ++t) dsum += dloge.at(t, 0);
  fv.values[3 * kMelFilters + 1] = dsum / double(dloge.rows);
  return fv;
}

FeatureVector mfcc_features(const double* frame, size_t n,
                            double sample_rate_hz) {
  Matrix logmel;
  std::vector<double> loge;
  log_mel_matrix(frame, n, sample_rate_hz, logmel, loge);

  static const Matrix dct = dct2_orthonormal(kMelFilters);
  Matrix ceps(logmel.rows, kCepstra);
  for (size_t t = 0; t < logmel.rows; ++t)
    for (size_t k = 0; k < kCepstra; ++k)
      ceps.at(t, k) = kern::dot(dct.row(k + 1), logmel.row(t), kMelFilters);

  Matrix d1 = delta_features(ceps);
  Matrix d2 = delta_features(d1);

  FeatureVector fv;
  fv.method = FeatureMethod::mfcc;
  fv.values.resize(3 * kCepstra + 1);
  mean_over_rows(ceps, fv.values.data());
  mean_over_rows(d1, fv.values.data() + kCepstra);
  mean_over_rows(d2, fv.values.data() + 2 * kCepstra);
  fv.values[3 * kCepstra] = mean_of(loge);
  return fv;
}

std::vector<double> haar_packet_energies(const double* x, size_t n, int depth) {
  size_t leaves = size_t(1) << depth;
  size_t p2 = 1;
  while (p2 * 2 <= n) p2 *= 2;
  if (n < leaves || p2 < leaves)
    fail(ErrorKind::data, "input too short for wavelet packet depth " +
                              std::to_string(depth));

  std::vector<double> buf(x, x + p2);
  std::vector<double> tmp(p2);
  const double inv_sqrt2 = std::sqrt(0.5);
  for (int level = 0; level < depth; ++level) {
    size_t node_len = p2 >> level;
    size_t half = node_len / 2;
    for (size_t base = 0; base < p2; base += node_len) {
      for (size_t i = 0; i < half; ++i) {
        double a = buf[base + 2 * i];
        double b = buf[base + 2 * i + 1];
        tmp[base + i] = (a + b) * inv_sqrt2;
        tmp[base + half + i] = (a - b) * inv_sqrt2;
      }
    }
    std::swap(buf, tmp);
  }

  // Natural (path) order -> frequency order: each high-pass branch mirrors
  // its sub-spectrum, so the band index is the prefix-XOR (inverse Gray code)
  // of the path bits.
  size_t leaf_len = p2 >> depth;
  std::vector<double> energies(leaves);
  for (size_t p = 0; p < leaves; ++p) {
    size_t f = 0;
    for (size_t q = p; q != 0; q >>= 1) f ^= q;
    energies[f] = kern::sum_squares(buf.data() + p * leaf_len, leaf_len);
  }
  return energies;
}

FeatureVector dwt_features(const double* frame, size_t n) {
  auto energies = haar_packet_energies(frame, n, kWaveletDepth);
  FeatureVector fv;
  fv.method = FeatureMethod::dwt;
  fv.values.resize(energies.size());
  for (size_t i = 0; i < energies.size(); ++i)
    fv.values[i] = std::log(energies[i] + kLogFloor);
  return fv;
}

FeatureVector extract_features(FeatureMethod m, const double* frame, size_t n,
                               double sample_rate_hz) {
  switch (m) {
    case FeatureMethod::stft: return stft_features(frame, n, sample_rate_hz);
    case FeatureMethod::dwt: return dwt_features(frame, n);
    case FeatureMethod::mfcc: return mfcc_features(frame, n, sample_rate_hz);
    case FeatureMethod::fbank: return fbank_features(frame, n, sample_rate_hz);
  }
  fail(ErrorKind::param, "bad feature method");
}

Matrix extract_features(FeatureMethod m, const FrameSeries& fs) {
  if (fs.frames.rows == 0) fail(ErrorKind::data, "no frames");
  Matrix out(fs.frames.rows, method_dim(m));
  for (size_t i = 0; i < fs.frames.rows; ++i) {
    FeatureVector fv = extract_features(m, fs.frames.row(i), fs.frames.cols,
                                        double(fs.sample_rate_hz));
    std::memcpy(out.row(i), fv.values.data(), fv.values.size() * sizeof(double));
  }
  return out;
}

NormStats fit_norm(const Matrix& X, FeatureMethod method) {
  if (X.rows < 2) fail(ErrorKind::data, "need at least 2 vectors to fit norm");
  NormStats st;
  st.method = method;
  st.mean.assign(X.cols, 0.0);
  st.std.assign(X.cols, 0.0);
  for (size_t i = 0; i < X.rows; ++i)
    kern::axpy(1.0, X.row(i), st.mean.data(), X.cols);
  for (double& m : st.mean) m /= double(X.rows);
  for (size_t i = 0; i < X.rows; ++i) {
    const double* r = X.row(i);
    for (size_t j = 0; j < X.cols; ++j) {
      double d = r[j] - st.mean[j];
      st.std[j] += d * d;
    }
  }
  for (double& s : st.std) {
    s = std::sqrt(s / double(X.rows));  // population std
    if (s < 1e-8) s = 1e-8;
  }
  return st;
}

void apply_norm(const NormStats& stats, double* v, size_t dim) {
  if (dim != stats.mean.size())
    fail(ErrorKind::data, "feature dimension mismatch in apply_norm");
  for (size_t j = 0; j < dim; ++j) v[j] = (v[j] - stats.mean[j]) / stats.std[j];
}

Matrix apply_norm(const NormStats& stats, const Matrix& X) {
  if (X.cols != stats.mean.size())
    fail(ErrorKind::data, "feature dimension mismatch in apply_norm");
  Matrix out = X;
  for (size_t i = 0; i < out.rows; ++i) apply_norm(stats, out.row(i), out.cols);
  return out;
}

}  // namespace hydroflow
