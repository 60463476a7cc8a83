#include "quietgait/acoustics/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "quietgait/common/error.hpp"

namespace quietgait::acoustics {

namespace {

std::uint16_t read_u16(const std::vector<std::uint8_t>& b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t read_u32(const std::vector<std::uint8_t>& b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

void push_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xff));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

void push_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xff));
  b.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  b.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  b.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

void push_tag(std::vector<std::uint8_t>& b, const char* tag) {
  b.insert(b.end(), tag, tag + 4);
}

}  // namespace

AudioClip read_wav(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0)
    throw ParseError("wav: missing RIFF header");
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw ParseError("wav: RIFF form type is not WAVE");

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  AudioClip clip;
  bool have_data = false;

  std::size_t off = 12;
  while (off + 8 <= bytes.size()) {
    char tag[5] = {0};
    std::memcpy(tag, bytes.data() + off, 4);
    const std::uint32_t size = read_u32(bytes, off + 4);
    const std::size_t body = off + 8;
    if (body + size > bytes.size())
      throw ParseError(std::string("wav: chunk '") + tag + "' extends past end of file");

    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (size < 16) throw ParseError("wav: chunk 'fmt ' is too short");
      const std::uint16_t format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      sample_rate = read_u32(bytes, body + 4);
      bits = read_u16(bytes, body + 14);
      if (format != 1)
        throw ParseError("wav: chunk 'fmt ' declares a non-PCM format tag " +
                         std::to_string(format));
      if (bits != 16)
        throw ParseError("wav: chunk 'fmt ' declares " + std::to_string(bits) +
                         " bits per sample; only 16 is supported");
      if (channels != 1 && channels != 2)
        throw ParseError("wav: chunk 'fmt ' declares " + std::to_string(channels) +
                         " channels; only mono or stereo is supported");
      if (sample_rate == 0) throw ParseError("wav: chunk 'fmt ' declares a zero sample rate");
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw ParseError("wav: chunk 'data' appears before 'fmt '");
      const std::size_t frame = 2u * channels;
      if (size % frame != 0)
        throw ParseError("wav: chunk 'data' size is not a whole number of frames");
      const std::size_t frames = size / frame;
      clip.samples.resize(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::uint16_t c = 0; c < channels; ++c) {
          const auto raw = static_cast<std::int16_t>(read_u16(bytes, body + i * frame + 2 * c));
          acc += static_cast<double>(raw);
        }
        clip.samples[i] = acc / channels / 32768.0;
      }
      have_data = true;
    }
    off = body + size + (size & 1u);  // chunks are word-aligned
  }

  if (!have_fmt) throw ParseError("wav: chunk 'fmt ' not found");
  if (!have_data) throw ParseError("wav: chunk 'data' not found");
  clip.sample_rate = static_cast<double>(sample_rate);
  return clip;
}

std::vector<std::uint8_t> write_wav(const AudioClip& clip) {
  if (!(clip.sample_rate > 0.0))
    throw InvalidInputError("write_wav: sample rate must be positive");
  for (double s : clip.samples)
    if (!std::isfinite(s)) throw InvalidInputError("write_wav: non-finite sample");

  const auto rate = static_cast<std::uint32_t>(std::lround(clip.sample_rate));
  const auto data_size = static_cast<std::uint32_t>(2 * clip.samples.size());
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  push_tag(out, "RIFF");
  push_u32(out, 36 + data_size);
  push_tag(out, "WAVE");
  push_tag(out, "fmt ");
  push_u32(out, 16);
  push_u16(out, 1);          // PCM
  push_u16(out, 1);          // mono
  push_u32(out, rate);
  push_u32(out, rate * 2);   // byte rate
  push_u16(out, 2);          // block align
  push_u16(out, 16);         // bits per sample
  push_tag(out, "data");
  push_u32(out, data_size);
  for (double s : clip.samples) {
    const long q = std::lround(s * 32768.0);
    const auto v = static_cast<std::int16_t>(std::clamp(q, -32768l, 32767l));
    push_u16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

AudioClip read_wav_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open WAV file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_wav(bytes);
}

void write_wav_file(const std::string& path, const AudioClip& clip) {
  const auto bytes = write_wav(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot open WAV file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing WAV file: " + path);
}

}  // namespace quietgait::acoustics
