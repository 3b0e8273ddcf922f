#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hydroflow/linalg.hpp"

namespace hydroflow {

// Valid flow-rate labels in mL/min. 0 means no flow.
inline constexpr int kFlowClasses[] = {0, 50, 100, 250, 500, 1000, 2000};
inline constexpr size_t kNumFlowClasses = 7;

bool is_flow_class(int mlpm);
size_t flow_class_index(int mlpm);  // param error when invalid

struct FlowClass {
  int mlpm = 0;
  static FlowClass make(int mlpm);  // validates against kFlowClasses
  bool is_flow() const { return mlpm > 0; }
};

struct AudioClip {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate_hz = 44100;
  FlowClass label{};
  int session_id = 0;
};

struct FrameSeries {
  Matrix frames;  // n_frames x frame_len
  int sample_rate_hz = 44100;
  FlowClass label{};
  int session_id = 0;
};

// PCM-16 RIFF/WAVE only. Stereo is downmixed by per-sample channel mean and
// samples are scaled by 1/32768. Malformed or truncated containers raise
// format errors, non-PCM16 encodings unsupported, an empty data chunk a data
// error; unreadable paths raise io errors.
AudioClip load_wav(const std::string& path, FlowClass label = {},
                   int session_id = 0);

// Mono PCM-16 writer; samples are clamped to [-1, 1] before quantization.
void write_wav(const AudioClip& clip, const std::string& path);

// Splits a clip into consecutive non-overlapping frames; a trailing partial
// frame is dropped. A clip shorter than one frame is a data error.
FrameSeries frame_clip(const AudioClip& clip, double frame_seconds = 1.0);

}  // namespace hydroflow
