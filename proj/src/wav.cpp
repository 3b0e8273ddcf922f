#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "hydroflow/audio.hpp"
#include "hydroflow/error.hpp"

namespace hydroflow {

namespace {

uint32_t read_u32(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}

uint16_t read_u16(const uint8_t* p) {
  return uint16_t(p[0]) | uint16_t(p[1]) << 8;
}

void put_u32(std::string& out, uint32_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char((v >> 8) & 0xff));
  out.push_back(char((v >> 16) & 0xff));
  out.push_back(char((v >> 24) & 0xff));
}

void put_u16(std::string& out, uint16_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char((v >> 8) & 0xff));
}

}  // namespace

AudioClip load_wav(const std::string& path, FlowClass label, int session_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::io, "read failed: " + path);

  const uint8_t* p = reinterpret_cast<const uint8_t*>(bytes.data());
  size_t size = bytes.size();
  if (size < 12 || std::memcmp(p, "RIFF", 4) != 0 ||
      std::memcmp(p + 8, "WAVE", 4) != 0)
    fail(ErrorKind::format, "not a RIFF/WAVE file: " + path);

  // chunk walk; only fmt and data matter
  bool have_fmt = false;
  uint16_t format_tag = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  const uint8_t* data = nullptr;
  uint32_t data_size = 0;

  size_t pos = 12;
  while (pos + 8 <= size) {
    const uint8_t* hdr = p + pos;
    uint32_t chunk_size = read_u32(hdr + 4);
    const uint8_t* body = hdr + 8;
    if (pos + 8 + chunk_size > size)
      fail(ErrorKind::format, "truncated chunk in " + path);
    if (!std::memcmp(hdr, "fmt ", 4)) {
      if (chunk_size < 16) fail(ErrorKind::format, "short fmt chunk");
      format_tag = read_u16(body);
      channels = read_u16(body + 2);
      sample_rate = read_u32(body + 4);
      bits = read_u16(body + 14);
      have_fmt = true;
    } else if (!std::memcmp(hdr, "data", 4)) {
      data = body;
      data_size = chunk_size;
    }
    pos += 8 + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || !data) fail(ErrorKind::format, "missing fmt or data chunk");
  if (format_tag != 1 || bits != 16)
    fail(ErrorKind::unsupported,
         "only PCM-16 encoding is supported (format tag " +
             std::to_string(format_tag) + ", " + std::to_string(bits) +
             " bits)");
  if (channels < 1 || channels > 2)
    fail(ErrorKind::unsupported, "only mono or stereo supported");
  if (sample_rate == 0) fail(ErrorKind::format, "zero sample rate");
  if (data_size == 0) fail(ErrorKind::data, "empty data chunk");
  if (data_size % (2 * channels) != 0)
    fail(ErrorKind::format, "data chunk not a whole number of sample frames");

  size_t n = data_size / (2 * channels);
  AudioClip clip;
  clip.sample_rate_hz = int(sample_rate);
  clip.label = label;
  clip.session_id = session_id;
  clip.samples.resize(n);
  constexpr double scale = 1.0 / 32768.0;
  for (size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (size_t c = 0; c < channels; ++c) {
      int16_t s = int16_t(read_u16(data + 2 * (i * channels + c)));
      acc += double(s);
    }
    clip.samples[i] = acc * scale / double(channels);
  }
  return clip;
}

void write_wav(const AudioClip& clip, const std::string& path) {
  size_t n = clip.samples.size();
  uint32_t data_size = uint32_t(n * 2);

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put_u32(out, 36 + data_size);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, uint32_t(clip.sample_rate_hz));
  put_u32(out, uint32_t(clip.sample_rate_hz) * 2);  // byte rate
  put_u16(out, 2);                                  // block align
  put_u16(out, 16);                                 // bits
  out += "data";
  put_u32(out, data_size);
  for (size_t i = 0; i < n; ++i) {
    double v = clip.samples[i];
    if (v > 1.0) v = 1.0;
    if (v < -1.0) v = -1.0;
    long q = std::lrint(v * 32768.0);
    if (q > 32767) q = 32767;
    if (q < -32768) q = -32768;
    put_u16(out, uint16_t(int16_t(q)));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::io, "cannot open for writing: " + path);
  f.write(out.data(), std::streamsize(out.size()));
  f.flush();
  if (!f) fail(ErrorKind::io, "write failed: " + path);
}

}  // namespace hydroflow
