#include "fastwave/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "fastwave/error.hpp"
#include "fastwave/inference.hpp"

namespace fastwave {
namespace {

void put(std::vector<std::uint8_t>& out, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_tag(std::vector<std::uint8_t>& out, const char (&tag)[5]) { out.insert(out.end(), tag, tag + 4); }

std::uint32_t get(std::span<const std::uint8_t> b, std::size_t pos, int bytes) {
  std::uint32_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= std::uint32_t{b[pos + i]} << (8 * i);
  return v;
}

bool tag_at(std::span<const std::uint8_t> b, std::size_t pos, const char* tag) {
  return std::memcmp(b.data() + pos, tag, 4) == 0;
}

}  // namespace

std::int16_t to_pcm16(double s) noexcept {
  if (std::isnan(s)) return 0;
  const double v = std::clamp(std::round(s * 32767.0), -32768.0, 32767.0);
  return static_cast<std::int16_t>(v);
}

std::vector<std::uint8_t> encode_wav(std::span<const double> samples, std::uint32_t sample_rate) {
  const WavSpec spec{sample_rate};
  const std::uint32_t block_align = spec.channels * spec.bit_depth / 8;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * block_align);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put(out, 36 + data_bytes, 4);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put(out, 16, 4);
  put(out, 1, 2);  // PCM
  put(out, spec.channels, 2);
  put(out, spec.sample_rate, 4);
  put(out, spec.sample_rate * block_align, 4);
  put(out, block_align, 2);
  put(out, spec.bit_depth, 2);
  put_tag(out, "data");
  put(out, data_bytes, 4);
  for (double s : samples) put(out, static_cast<std::uint16_t>(to_pcm16(s)), 2);
  return out;
}

void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               std::uint32_t sample_rate) {
  const auto bytes = encode_wav(samples, sample_rate);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

void write_wav(const std::filesystem::path& path, const Waveform& waveform) {
  write_wav(path, waveform.samples, waveform.sample_rate);
}

WavData decode_wav(std::span<const std::uint8_t> b) {
  if (b.size() < 12 || !tag_at(b, 0, "RIFF") || !tag_at(b, 8, "WAVE")) {
    fail(ErrorCode::kInvalidFormat, "not a RIFF/WAVE file");
  }
  WavData wav;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint32_t size = get(b, pos + 4, 4);
    const std::size_t body = pos + 8;
    if (size > b.size() - body) fail(ErrorCode::kInvalidFormat, "chunk runs past end of file");
    if (tag_at(b, pos, "fmt ")) {
      if (size < 16) fail(ErrorCode::kInvalidFormat, "short fmt chunk");
      const auto format = get(b, body, 2);
      const auto channels = get(b, body + 2, 2);
      const auto bits = get(b, body + 14, 2);
      if (format != 1 || channels != 1 || bits != 16) {
        fail(ErrorCode::kInvalidFormat, "only mono 16-bit PCM is supported");
      }
      wav.sample_rate = get(b, body + 4, 4);
      have_fmt = true;
    } else if (tag_at(b, pos, "data")) {
      if (!have_fmt) fail(ErrorCode::kInvalidFormat, "data chunk before fmt chunk");
      wav.samples.reserve(size / 2);
      for (std::size_t i = 0; i + 1 < size; i += 2) {
        const auto v = static_cast<std::int16_t>(get(b, body + i, 2));
        wav.samples.push_back(v / 32767.0);
      }
      return wav;
    }
    pos = body + size + (size & 1);
  }
  fail(ErrorCode::kInvalidFormat, "no data chunk");
}

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

}  // namespace fastwave
