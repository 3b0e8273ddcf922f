#include "hydroflow/synth.hpp"

#include <cmath>
#include <complex>

#include "hydroflow/error.hpp"
#include "hydroflow/kernels.hpp"
#include "hydroflow/rng.hpp"

namespace hydroflow {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

using cplx = std::complex<double>;

// denominator coefficients of (1 - p z^-1)(1 - conj(p) z^-1)
void pole_pair_to_biquad(cplx zp, Biquad& q) {
  q.a1 = -2.0 * zp.real();
  q.a2 = std::norm(zp);
}

}  // namespace

std::array<Biquad, 2> butter_bandpass4(double lo_hz, double hi_hz, double fs) {
  if (!(0.0 < lo_hz && lo_hz < hi_hz && hi_hz < fs / 2.0))
    fail(ErrorKind::param, "band edges must satisfy 0 < lo < hi < fs/2");

  // prewarped analog edges, center, bandwidth
  double wl = 2.0 * fs * std::tan(kPi * lo_hz / fs);
  double wh = 2.0 * fs * std::tan(kPi * hi_hz / fs);
  double w0sq = wl * wh;
  double bw = wh - wl;

  // order-2 Butterworth prototype pole in the upper half plane; its two
  // band-pass images (the lower half comes along as conjugates)
  cplx proto(-std::sqrt(0.5), std::sqrt(0.5));
  cplx bp = bw * proto;
  cplx root = std::sqrt(bp * bp - 4.0 * w0sq);
  cplx s_poles[2] = {(bp + root) * 0.5, (bp - root) * 0.5};

  std::array<Biquad, 2> sos;
  for (int i = 0; i < 2; ++i) {
    cplx zp = (2.0 * fs + s_poles[i]) / (2.0 * fs - s_poles[i]);
    pole_pair_to_biquad(zp, sos[i]);
    // zeros at z = +1 and z = -1 for each section: (1 - z^-2)
    sos[i].b0 = 1.0;
    sos[i].b1 = 0.0;
    sos[i].b2 = -1.0;
  }

  // normalize to unity gain at the (digital) center frequency
  double fc = std::atan(std::sqrt(w0sq) / (2.0 * fs)) * fs / kPi;
  double g = cascade_response(sos, fc, fs);
  sos[0].b0 /= g;
  sos[0].b2 /= g;
  return sos;
}

double cascade_response(const std::array<Biquad, 2>& sos, double f_hz,
                        double fs) {
  cplx zinv = std::exp(cplx(0.0, -2.0 * kPi * f_hz / fs));
  cplx h(1.0, 0.0);
  for (const Biquad& q : sos) {
    cplx num = q.b0 + q.b1 * zinv + q.b2 * zinv * zinv;
    cplx den = 1.0 + q.a1 * zinv + q.a2 * zinv * zinv;
    h *= num / den;
  }
  return std::abs(h);
}

AudioClip synthesize_flow(const SynthSpec& spec) {
  if (!is_flow_class(spec.flow_mlpm))
    fail(ErrorKind::param, "invalid flow class: " + std::to_string(spec.flow_mlpm));
  if (!(spec.duration_s > 0.0))
    fail(ErrorKind::param, "duration must be positive");
  if (spec.sample_rate_hz <= 0) fail(ErrorKind::param, "bad sample rate");
  if (!(spec.noise_floor_rms > 0.0))
    fail(ErrorKind::param, "noise floor must be positive");
  if (!(spec.gain_ref > 0.0)) fail(ErrorKind::param, "gain_ref must be positive");
  if (!(0.0 < spec.band_lo_hz && spec.band_lo_hz < spec.band_hi_hz &&
        spec.band_hi_hz < spec.sample_rate_hz / 2.0))
    fail(ErrorKind::param, "bad band edges");

  size_t n = size_t(std::lround(spec.duration_s * spec.sample_rate_hz));
  if (n == 0) fail(ErrorKind::param, "duration too short for one sample");

  Rng rng(spec.seed);
  AudioClip clip;
  clip.sample_rate_hz = spec.sample_rate_hz;
  clip.label = FlowClass::make(spec.flow_mlpm);
  clip.session_id = spec.session_id;
  clip.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    clip.samples[i] = spec.noise_floor_rms * rng.gaussian();

  if (spec.flow_mlpm > 0) {
    std::vector<double> flow(n);
    for (size_t i = 0; i < n; ++i) flow[i] = rng.gaussian();

    auto sos = butter_bandpass4(spec.band_lo_hz, spec.band_hi_hz,
                                double(spec.sample_rate_hz));
    for (const Biquad& q : sos) {
      double s1 = 0.0, s2 = 0.0;
      for (size_t i = 0; i < n; ++i) {
        double x = flow[i];
        double y = q.b0 * x + s1;
        s1 = q.b1 * x - q.a1 * y + s2;
        s2 = q.b2 * x - q.a2 * y;
        flow[i] = y;
      }
    }

    double target =
        spec.gain_ref * std::pow(double(spec.flow_mlpm) / 1000.0, spec.gain_exponent);
    double rms = std::sqrt(kern::sum_squares(flow.data(), n) / double(n));
    double scale = rms > 0.0 ? target / rms : 0.0;
    kern::axpy(scale, flow.data(), clip.samples.data(), n);
  }

  for (double& v : clip.samples) {
    if (v > 1.0) v = 1.0;
    if (v < -1.0) v = -1.0;
  }
  return clip;
}

}  // namespace hydroflow
