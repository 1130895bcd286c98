#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace fastwave {

struct Waveform;

// 16-bit PCM, mono, little-endian, canonical 44-byte header.
struct WavSpec {
  std::uint32_t sample_rate = 16000;
  std::uint16_t bit_depth = 16;
  std::uint16_t channels = 1;
};

struct WavData {
  std::uint32_t sample_rate = 0;
  std::vector<double> samples;  // pcm / 32767
};

// clamp(round(s * 32767), -32768, 32767), ties away from zero.
std::int16_t to_pcm16(double s) noexcept;

std::vector<std::uint8_t> encode_wav(std::span<const double> samples, std::uint32_t sample_rate);
void write_wav(const std::filesystem::path& path, const Waveform& waveform);
void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               std::uint32_t sample_rate);

// Reads mono 16-bit PCM; other layouts throw kInvalidFormat, I/O errors kIo.
WavData decode_wav(std::span<const std::uint8_t> bytes);
WavData read_wav(const std::filesystem::path& path);

}  // namespace fastwave
