#include "hydroflow/audio.hpp"

#include <cmath>
#include <cstring>

#include "hydroflow/error.hpp"

namespace hydroflow {

bool is_flow_class(int mlpm) {
  for (int c : kFlowClasses)
    if (c == mlpm) return true;
  return false;
}

size_t flow_class_index(int mlpm) {
  for (size_t i = 0; i < kNumFlowClasses; ++i)
    if (kFlowClasses[i] == mlpm) return i;
  fail(ErrorKind::param, "invalid flow class: " + std::to_string(mlpm));
}

FlowClass FlowClass::make(int mlpm) {
  flow_class_index(mlpm);
  return FlowClass{mlpm};
}

FrameSeries frame_clip(const AudioClip& clip, double frame_seconds) {
  if (!(frame_seconds > 0.0))
    fail(ErrorKind::param, "frame_seconds must be positive");
  if (clip.sample_rate_hz <= 0) fail(ErrorKind::param, "bad sample rate");
  if (clip.samples.empty()) fail(ErrorKind::data, "empty clip");

  size_t frame_len = size_t(std::lround(frame_seconds * clip.sample_rate_hz));
  if (frame_len == 0) fail(ErrorKind::param, "frame shorter than one sample");
  size_t n_frames = clip.samples.size() / frame_len;
  if (n_frames == 0)
    fail(ErrorKind::data, "clip shorter than one frame (" +
                              std::to_string(clip.samples.size()) + " < " +
                              std::to_string(frame_len) + " samples)");

  FrameSeries fs;
  fs.sample_rate_hz = clip.sample_rate_hz;
  fs.label = clip.label;
  fs.session_id = clip.session_id;
  fs.frames = Matrix(n_frames, frame_len);
  for (size_t i = 0; i < n_frames; ++i)
    std::memcpy(fs.frames.row(i), clip.samples.data() + i * frame_len,
                frame_len * sizeof(double));
  return fs;
}

}  // namespace hydroflow
