#pragma once

// WAV (RIFF/WAVE, 16-bit PCM) ingestion and emission. Samples are held as
// doubles normalized by 1/32768, so the full-scale positive code 0x7FFF maps
// to 32767/32768. Stereo input is downmixed by averaging the two channels.

#include <cstdint>
#include <string>
#include <vector>

namespace quietgait::acoustics {

struct AudioClip {
  double sample_rate = 0.0;        // Hz
  std::vector<double> samples;     // normalized amplitudes
};

/// Parses a RIFF/WAVE byte stream. Only PCM (format tag 1) at 16 bits per
/// sample is accepted, mono or stereo; anything else raises a parse error
/// naming the offending chunk.
AudioClip read_wav(const std::vector<std::uint8_t>& bytes);

/// Serializes a clip as mono 16-bit PCM. Samples are quantized with
/// round(sample * 32768) clamped to the int16 range, so any clip whose
/// samples already lie on the 1/32768 grid survives a write/read round trip
/// bit-exactly.
std::vector<std::uint8_t> write_wav(const AudioClip& clip);

/// Convenience wrappers for file paths.
AudioClip read_wav_file(const std::string& path);
void write_wav_file(const std::string& path, const AudioClip& clip);

}  // namespace quietgait::acoustics
