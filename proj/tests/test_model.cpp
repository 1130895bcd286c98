#include <cstring>
#include <fstream>

#include "doctest.h"
#include "fastwave/model.hpp"
#include "oracles.hpp"

using namespace fastwave;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected fastwave::Error");
  return ErrorCode::kIo;
}

ModelConfig small(std::uint32_t blocks, std::uint32_t layers, std::uint32_t channels) {
  ModelConfig c;
  c.num_blocks = blocks;
  c.layers_per_block = layers;
  c.channels = channels;
  return c;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("default layer specs") {
  const auto specs = validate_config(ModelConfig{});
  REQUIRE(specs.size() == 28);
  const LayerSpec& l10 = specs[9];
  CHECK(l10.block_index == 1);
  CHECK(l10.layer_index == 10);
  CHECK(l10.dilation == 512);
  CHECK(l10.queue_length == 512);
  CHECK(l10.in_channels == 128);
  CHECK(l10.out_channels == 128);

  CHECK(specs[0].in_channels == 1);
  CHECK(specs[0].out_channels == 128);
  CHECK(specs[0].queue_length == 1);
  // Second block starts over at dilation 1 but is fed 128 channels.
  CHECK(specs[14].block_index == 2);
  CHECK(specs[14].layer_index == 1);
  CHECK(specs[14].in_channels == 128);
  CHECK(specs[14].queue_length == 1);

  for (const auto& s : specs) CHECK(s.queue_length == (std::size_t{1} << (s.layer_index - 1)));
}

TEST_CASE("config errors") {
  ModelConfig c;
  c.filter_width = 3;
  CHECK(code_of([&] { validate_config(c); }) == ErrorCode::kInvalidFilterWidth);
  c = ModelConfig{};
  c.channels = 0;
  CHECK(code_of([&] { validate_config(c); }) == ErrorCode::kZeroChannels);
  c = ModelConfig{};
  c.layers_per_block = 0;
  CHECK(code_of([&] { validate_config(c); }) == ErrorCode::kZeroLayers);
  c = ModelConfig{};
  c.num_blocks = 0;
  CHECK(code_of([&] { validate_config(c); }) == ErrorCode::kZeroLayers);
  c = ModelConfig{};
  c.layers_per_block = 25;
  CHECK(code_of([&] { validate_config(c); }) == ErrorCode::kInvalidConfig);
  c.layers_per_block = 24;
  CHECK(validate_config(c).size() == 48);
}

TEST_CASE("validate_config is pure") {
  const ModelConfig c = small(2, 5, 7);
  CHECK(validate_config(c) == validate_config(c));
}

TEST_CASE("queue memory") {
  const QueueMemory m = estimate_queue_memory(ModelConfig{});
  CHECK(m.per_layer[13] == 1048576);
  CHECK(m.per_layer[14] == 128);
  CHECK(m.per_layer[0] == 1);
  std::size_t expect = 0;
  for (std::size_t l = 2; l <= 14; ++l) expect += (std::size_t{1} << (l - 1)) * 128;
  expect = 128 + expect + (1 + expect);  // block 2 layer 1 is fed 128 channels, block 1 layer 1 just one
  CHECK(m.total == expect);
  std::size_t sum = 0;
  for (auto v : m.per_layer) sum += v;
  CHECK(m.total == sum);

  CHECK(estimate_queue_memory(small(1, 1, 1)).total == 1);
}

TEST_CASE("receptive field matches graph traversal") {
  CHECK(receptive_field(small(1, 4, 8)) == 16);
  CHECK(receptive_field(ModelConfig{}) == 32767);
  CHECK(receptive_field(small(1, 1, 1)) == 2);
  for (std::uint32_t b = 1; b <= 3; ++b)
    for (std::uint32_t l = 1; l <= 8; ++l)
      CHECK(receptive_field(small(b, l, 2)) == oracle::traversal_receptive_field(small(b, l, 2)));
  CHECK(oracle::traversal_receptive_field(ModelConfig{}) == 32767);
}

TEST_CASE("random weights") {
  const ModelConfig c = small(1, 3, 6);
  CHECK(random_weights(c, 7, 0.25) == random_weights(c, 7, 0.25));
  CHECK_FALSE(random_weights(c, 1, 0.25) == random_weights(c, 2, 0.25));
  const WeightSet ws = random_weights(c, 3, 0.1);
  check_weights(c, ws);
  auto within = [](std::span<const float> v) {
    for (float x : v)
      if (std::abs(x) > 0.1f) return false;
    return true;
  };
  for (const auto& k : ws.kernels) {
    CHECK(within(k.past.flat()));
    CHECK(within(k.current.flat()));
  }
  CHECK(within(ws.fc_weight.flat()));
  CHECK(within(ws.fc_bias));
  CHECK(ws.fc_weight.rows() == 6);
  CHECK(ws.fc_weight.cols() == 256);
}

TEST_CASE("weight file round trip is bit exact") {
  oracle::TempDir dir;
  const ModelConfig c = small(2, 3, 5);
  WeightSet ws = random_weights(c, 11, 0.5);
  ws.kernels[0].past(0, 0) = -0.0f;
  ws.fc_bias[3] = std::numeric_limits<float>::denorm_min();
  save_weights(dir / "w.bin", c, ws);
  const WeightSet back = load_weights(dir / "w.bin", c);
  const auto a = encode_weights(c, ws);
  const auto b = encode_weights(c, back);
  CHECK(a == b);
  std::uint32_t bits = 0;
  std::memcpy(&bits, &back.kernels[0].past(0, 0), 4);
  CHECK(bits == 0x80000000u);

  std::ifstream in(dir / "w.bin", std::ios::binary);
  std::vector<std::uint8_t> disk((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(disk == a);
  CHECK(std::memcmp(disk.data(), kWeightMagic.data(), 8) == 0);
}

TEST_CASE("weight file errors") {
  const ModelConfig c = small(1, 2, 3);
  auto bytes = encode_weights(c, random_weights(c, 1, 0.2));

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK(code_of([&] { decode_weights(bad_magic); }) == ErrorCode::kMagicMismatch);

  const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + 8 + 24 + 10);
  CHECK(code_of([&] { decode_weights(cut); }) == ErrorCode::kTruncatedFile);
  const std::vector<std::uint8_t> header_cut(bytes.begin(), bytes.begin() + 12);
  CHECK(code_of([&] { decode_weights(header_cut); }) == ErrorCode::kTruncatedFile);

  oracle::TempDir dir;
  save_weights(dir / "w.bin", c, random_weights(c, 1, 0.2));
  CHECK(code_of([&] { load_weights(dir / "w.bin", small(1, 2, 4)); }) == ErrorCode::kShapeMismatch);
  CHECK(code_of([&] { load_weights(dir / "missing.bin", c); }) == ErrorCode::kIo);

  WeightSet wrong = random_weights(c, 1, 0.2);
  wrong.fc_bias.pop_back();
  CHECK(code_of([&] { save_weights(dir / "x.bin", c, wrong); }) == ErrorCode::kShapeMismatch);
}

TEST_CASE("config json") {
  const ModelConfig c = small(1, 9, 32);
  CHECK(parse_config_json(config_to_json(c)) == c);
  CHECK(parse_config_json("{}") == ModelConfig{});
  CHECK(parse_config_json(R"({"channels": 4, "number_mode": "real"})").channels == 4);
  CHECK(code_of([] { parse_config_json(R"({"channels": "many"})"); }) == ErrorCode::kInvalidConfig);
  CHECK(code_of([] { parse_config_json("not json"); }) == ErrorCode::kInvalidConfig);
  CHECK(code_of([] { parse_config_json(R"({"channels": -3})"); }) == ErrorCode::kInvalidConfig);

  oracle::TempDir dir;
  save_config(dir / "c.json", c);
  CHECK(load_config(dir / "c.json") == c);
}

}  // TEST_SUITE
