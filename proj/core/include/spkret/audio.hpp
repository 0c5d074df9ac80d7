#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spkret {

/// Mono 16 kHz signed 16-bit PCM signal.
struct SampleBuffer {
  std::vector<std::int16_t> samples;
  int sample_rate = 16000;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Loads a RIFF/WAVE file.
///
/// Accepts only PCM, 16-bit, mono, 16000 Hz; anything else throws
/// UnsupportedFormat (no silent conversion). Structural problems
/// (bad magic, truncated chunks, odd data size) throw CorruptFile.
/// Files shorter than one 400-sample analysis window throw TooShort.
SampleBuffer load_wav(const std::string& path);

/// Parses WAV bytes already in memory; same validation as load_wav.
SampleBuffer parse_wav(const std::vector<std::uint8_t>& bytes, const std::string& origin);

}  // namespace spkret
