#pragma once

#include "uosf/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace uosf {

enum class WavSampleFormat { pcm16, pcm24, pcm32, float32 };

struct WavInfo {
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
  WavSampleFormat format = WavSampleFormat::pcm16;
  std::size_t frames = 0;
};

// Decodes PCM 16/24/32-bit integer or 32-bit float WAV data (including
// WAVE_FORMAT_EXTENSIBLE). Channel 0 is kept. Integer samples are scaled by
// 1/2^(bits-1), so full scale maps to [-1, 1). Throws IngestionError on a
// malformed or truncated file, an unsupported codec or zero samples.
TimeSeries read_wav(const std::filesystem::path& path, WavInfo* info = nullptr);
TimeSeries decode_wav(std::span<const std::uint8_t> bytes, WavInfo* info = nullptr);

// Mono output. Integer formats clip to full scale.
void write_wav(const std::filesystem::path& path, const TimeSeries& series,
               WavSampleFormat format = WavSampleFormat::float32);
std::vector<std::uint8_t> encode_wav(const TimeSeries& series, WavSampleFormat format);

}  // namespace uosf
