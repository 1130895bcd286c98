#include <cstring>
#include <fstream>

#include "doctest.h"
#include "fastwave/inference.hpp"
#include "fastwave/wav.hpp"
#include "oracles.hpp"

using namespace fastwave;

namespace {

std::uint32_t u32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return b[at] | (b[at + 1] << 8) | (b[at + 2] << 16) | (std::uint32_t{b[at + 3]} << 24);
}
std::uint16_t u16(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

}  // namespace

TEST_SUITE("wav") {

TEST_CASE("pcm mapping") {
  CHECK(to_pcm16(1.0) == 32767);
  CHECK(to_pcm16(-1.0) == -32767);
  CHECK(to_pcm16(0.0) == 0);
  CHECK(to_pcm16(2.0) == 32767);
  CHECK(to_pcm16(-2.0) == -32768);
  CHECK(to_pcm16(0.5 / 32767) == 1);
  CHECK(to_pcm16(-0.5 / 32767) == -1);
}

TEST_CASE("header layout") {
  const std::vector<double> s{0.0, 1.0, -1.0, 0.25, -0.5};
  const auto b = encode_wav(s, 16000);
  REQUIRE(b.size() == 44 + 2 * s.size());
  CHECK(std::memcmp(b.data(), "RIFF", 4) == 0);
  CHECK(std::memcmp(b.data() + 8, "WAVE", 4) == 0);
  CHECK(std::memcmp(b.data() + 12, "fmt ", 4) == 0);
  CHECK(std::memcmp(b.data() + 36, "data", 4) == 0);
  CHECK(u32(b, 4) == b.size() - 8);
  CHECK(u32(b, 16) == 16);
  CHECK(u16(b, 20) == 1);
  CHECK(u16(b, 22) == 1);
  CHECK(u32(b, 24) == 16000);
  CHECK(u32(b, 28) == 32000);
  CHECK(u16(b, 32) == 2);
  CHECK(u16(b, 34) == 16);
  CHECK(u32(b, 40) == 2 * s.size());
  CHECK(static_cast<std::int16_t>(u16(b, 46)) == 32767);
  CHECK(static_cast<std::int16_t>(u16(b, 48)) == -32767);
}

TEST_CASE("round trip through a file") {
  oracle::TempDir dir;
  Waveform w;
  w.sample_rate = 22050;
  for (std::uint32_t b = 0; b < 256; ++b) {
    w.bins.push_back(b);
    w.samples.push_back(dequantize(b, 256));
  }
  write_wav(dir / "a.wav", w);
  CHECK(std::filesystem::file_size(dir / "a.wav") == 44 + 2 * 256);
  const WavData back = read_wav(dir / "a.wav");
  CHECK(back.sample_rate == 22050);
  REQUIRE(back.samples.size() == 256);
  for (std::size_t i = 0; i < 256; ++i) CHECK(std::abs(back.samples[i] - w.samples[i]) <= 0.5 / 32767);
  CHECK(encode_wav(back.samples, 22050) == encode_wav(w.samples, 22050));
}

TEST_CASE("decoder skips unknown chunks and rejects other layouts") {
  const std::vector<double> s{0.1, -0.1};
  auto b = encode_wav(s, 8000);
  // Insert a LIST chunk between fmt and data.
  const std::vector<std::uint8_t> list{'L', 'I', 'S', 'T', 3, 0, 0, 0, 'a', 'b', 'c', 0};
  b.insert(b.begin() + 36, list.begin(), list.end());
  const WavData d = decode_wav(b);
  CHECK(d.samples.size() == 2);
  CHECK(d.sample_rate == 8000);

  auto stereo = encode_wav(s, 8000);
  stereo[22] = 2;
  CHECK_THROWS_AS(decode_wav(stereo), Error);
  auto not_riff = encode_wav(s, 8000);
  not_riff[0] = 'X';
  CHECK_THROWS_AS(decode_wav(not_riff), Error);
  const std::vector<std::uint8_t> tiny{'R', 'I', 'F', 'F'};
  CHECK_THROWS_AS(decode_wav(tiny), Error);
  oracle::TempDir dir;
  CHECK_THROWS_AS(read_wav(dir / "missing.wav"), Error);
  CHECK_THROWS_AS(write_wav(dir / "no" / "dir" / "x.wav", s, 8000), Error);
}

}  // TEST_SUITE
