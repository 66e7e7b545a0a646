#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace emomix {

inline constexpr int kPipelineSampleRate = 16000;

struct AudioBuffer {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate = kPipelineSampleRate;
};

// Throws InvalidAudio for empty, non-finite or out-of-range samples and
// UnsupportedSampleRate for anything other than 16 kHz.
void validate_audio(const AudioBuffer& audio);

// RIFF/WAVE, PCM signed 16-bit little-endian, mono. Any other encoding is a
// FormatError; a sample rate other than 16 kHz is UnsupportedSampleRate.
AudioBuffer read_wav(const std::filesystem::path& path);
// Same as read_wav() on an in-memory file; `name` only labels errors.
AudioBuffer decode_wav(std::string_view bytes, const std::string& name);

// Writes 16-bit PCM mono. Samples are clipped to [-1, 1] and rounded.
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio);

}  // namespace emomix
