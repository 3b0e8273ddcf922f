#pragma once

#include <array>
#include <cstdint>

#include "hydroflow/audio.hpp"

namespace hydroflow {

// Generator for benchmark audio: stationary white background noise at the
// configured floor plus, for non-zero flow, band-limited noise whose RMS
// follows a power law in the flow rate. Identical specs produce bit-identical
// sample sequences. The background stream is drawn before the flow stream, so
// two specs differing only in flow_mlpm share the same background and the
// same raw flow noise.
struct SynthSpec {
  int flow_mlpm = 0;
  double duration_s = 10.0;
  uint64_t seed = 0;
  double noise_floor_rms = 0.010;
  double band_lo_hz = 3000.0;
  double band_hi_hz = 7000.0;
  double gain_ref = 0.008;
  double gain_exponent = 0.6;
  int sample_rate_hz = 44100;
  int session_id = 0;
};

AudioClip synthesize_flow(const SynthSpec& spec);

// One second-order section, direct form II transposed.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

// 4th-order Butterworth band-pass (two cascaded biquads), designed from the
// order-2 analog prototype via the LP->BP transform and a prewarped bilinear
// mapping; unity gain at the band center.
std::array<Biquad, 2> butter_bandpass4(double lo_hz, double hi_hz, double fs);

// |H(e^{i 2 pi f/fs})| for a biquad cascade; used to validate band placement.
double cascade_response(const std::array<Biquad, 2>& sos, double f_hz,
                        double fs);

}  // namespace hydroflow
