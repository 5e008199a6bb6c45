#pragma once

// PCM WAV I/O: 16-bit integer and 32-bit float, any channel count (mixed
// down to mono on read).

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "emosura/core.hpp"

namespace emosura::bench {

struct MonoAudio {
  std::vector<float> samples;  // [-1, 1]
  int sample_rate = 16000;

  double duration_s() const { return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0; }
};

class WavError : public Error {
 public:
  using Error::Error;
};

MonoAudio decode_wav(std::span<const std::uint8_t> bytes);
MonoAudio read_wav(const std::filesystem::path& path);
/// 16-bit PCM mono.
std::vector<std::uint8_t> encode_wav16(const MonoAudio& audio);
void write_wav16(const std::filesystem::path& path, const MonoAudio& audio);

}  // namespace emosura::bench
