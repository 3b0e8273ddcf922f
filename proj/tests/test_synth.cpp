#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "hydroflow/fft.hpp"
#include "hydroflow/synth.hpp"

using namespace hydroflow;

namespace {

double rms(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / double(x.size()));
}

// Fraction of spectral energy inside [lo, hi] Hz, measured with an FFT over
// the first power-of-two prefix — independent of the filter implementation.
double band_energy_fraction(const std::vector<double>& x, double fs, double lo,
                            double hi) {
  size_t n = 1;
  while (n * 2 <= x.size()) n *= 2;
  std::vector<std::complex<double>> spec = rfft(x.data(), n);
  double total = 0.0, band = 0.0;
  for (size_t k = 0; k < spec.size(); ++k) {
    double f = double(k) * fs / double(n);
    double e = std::norm(spec[k]);
    total += e;
    if (f >= lo && f <= hi) band += e;
  }
  return band / total;
}

}  // namespace

TEST_CASE("identical specs produce bit-identical clips") {
  SynthSpec spec;
  spec.flow_mlpm = 500;
  spec.duration_s = 2.0;
  spec.seed = 77;
  AudioClip a = synthesize_flow(spec);
  AudioClip b = synthesize_flow(spec);
  REQUIRE(a.samples.size() == b.samples.size());
  CHECK(a.samples == b.samples);  // exact equality, not approximate
  CHECK(a.sample_rate_hz == spec.sample_rate_hz);
  CHECK(a.label.mlpm == 500);

  spec.seed = 78;
  AudioClip c = synthesize_flow(spec);
  CHECK(a.samples != c.samples);
}

TEST_CASE("zero flow is background noise at the configured floor") {
  SynthSpec spec;
  spec.flow_mlpm = 0;
  spec.duration_s = 4.0;
  spec.seed = 5;
  AudioClip clip = synthesize_flow(spec);
  CHECK(rms(clip.samples) == doctest::Approx(spec.noise_floor_rms).epsilon(0.05));
  // white background: band share ~ bandwidth share (4 kHz of 22.05 kHz)
  double frac = band_energy_fraction(clip.samples, 44100.0, 3000.0, 7000.0);
  CHECK(frac > 0.10);
  CHECK(frac < 0.30);
}

TEST_CASE("flow minus background is concentrated in the configured band") {
  SynthSpec spec;
  spec.duration_s = 4.0;
  spec.seed = 11;
  spec.flow_mlpm = 0;
  AudioClip background = synthesize_flow(spec);
  spec.flow_mlpm = 1000;
  AudioClip flowing = synthesize_flow(spec);
  REQUIRE(background.samples.size() == flowing.samples.size());

  // same seed => same background stream, so the difference isolates the flow
  std::vector<double> residual(flowing.samples.size());
  for (size_t i = 0; i < residual.size(); ++i)
    residual[i] = flowing.samples[i] - background.samples[i];

  // the 4th-order skirts (24 dB/oct) put ~3% of the energy outside a
  // one-octave margin around the configured 3-7 kHz band
  CHECK(band_energy_fraction(residual, 44100.0, 2000.0, 9000.0) > 0.95);
  CHECK(band_energy_fraction(residual, 44100.0, 2500.0, 7500.0) > 0.85);
  CHECK(rms(residual) == doctest::Approx(spec.gain_ref).epsilon(0.10));
}

TEST_CASE("flow level follows the power law in flow rate") {
  auto residual_rms = [](int mlpm) {
    SynthSpec spec;
    spec.duration_s = 4.0;
    spec.seed = 21;
    spec.flow_mlpm = 0;
    AudioClip background = synthesize_flow(spec);
    spec.flow_mlpm = mlpm;
    AudioClip flowing = synthesize_flow(spec);
    std::vector<double> residual(flowing.samples.size());
    for (size_t i = 0; i < residual.size(); ++i)
      residual[i] = flowing.samples[i] - background.samples[i];
    double s = 0.0;
    for (double v : residual) s += v * v;
    return std::sqrt(s / double(residual.size()));
  };
  double r250 = residual_rms(250);
  double r500 = residual_rms(500);
  double r1000 = residual_rms(1000);
  double r2000 = residual_rms(2000);
  CHECK(r250 < r500);
  CHECK(r500 < r1000);
  CHECK(r1000 < r2000);
  // scale-free ratio check: rms(2f)/rms(f) = 2^exponent
  CHECK(r2000 / r1000 == doctest::Approx(std::pow(2.0, 0.6)).epsilon(0.05));
  CHECK(r500 / r250 == doctest::Approx(std::pow(2.0, 0.6)).epsilon(0.05));
}

TEST_CASE("band-pass cascade: unity at center, strong rejection far out") {
  std::array<Biquad, 2> sos = butter_bandpass4(3000.0, 7000.0, 44100.0);
  double center = std::sqrt(3000.0 * 7000.0);
  CHECK(cascade_response(sos, center, 44100.0) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(cascade_response(sos, 300.0, 44100.0) < 0.02);
  CHECK(cascade_response(sos, 18000.0, 44100.0) < 0.02);
  // response decays monotonically moving away from the band edges
  CHECK(cascade_response(sos, 2000.0, 44100.0) >
        cascade_response(sos, 1000.0, 44100.0));
  CHECK(cascade_response(sos, 9000.0, 44100.0) >
        cascade_response(sos, 12000.0, 44100.0));
}

TEST_CASE("session id is stamped onto the clip") {
  SynthSpec spec;
  spec.session_id = 7;
  spec.duration_s = 1.0;
  AudioClip clip = synthesize_flow(spec);
  CHECK(clip.session_id == 7);
  CHECK(clip.samples.size() == size_t(44100));
}
