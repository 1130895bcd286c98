#include "fastwave/model.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <random>

#include "json.hpp"

namespace fastwave {
namespace {

constexpr std::uint32_t kMaxLayersPerBlock = 24;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

void put_matrix(std::vector<std::uint8_t>& out, const Matrix<float>& m) {
  for (float v : m.flat()) put_f32(out, v);
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32(const char* what) {
    if (bytes_.size() - pos_ < 4) {
      fail(ErrorCode::kTruncatedFile, std::string("file ends inside ") + what);
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }

  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

  void fill(Matrix<float>& m, const char* what) {
    for (float& v : m.flat()) v = f32(what);
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    if (bytes_.size() - pos_ < n) fail(ErrorCode::kTruncatedFile, "file shorter than header");
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::size_t final_out_channels(const std::vector<LayerSpec>& specs) {
  return specs.back().out_channels;
}

}  // namespace

std::vector<LayerSpec> validate_config(const ModelConfig& cfg) {
  if (cfg.filter_width != 2) {
    fail(ErrorCode::kInvalidFilterWidth,
         "filter width " + std::to_string(cfg.filter_width) + " unsupported (only 2)");
  }
  if (cfg.channels == 0) fail(ErrorCode::kZeroChannels, "channels must be >= 1");
  if (cfg.num_blocks == 0 || cfg.layers_per_block == 0) {
    fail(ErrorCode::kZeroLayers, "num_blocks and layers_per_block must be >= 1");
  }
  if (cfg.layers_per_block > kMaxLayersPerBlock) {
    fail(ErrorCode::kInvalidConfig,
         "layers_per_block > " + std::to_string(kMaxLayersPerBlock) + " (queue length overflow)");
  }
  if (cfg.quant_levels < 2) fail(ErrorCode::kInvalidConfig, "quant_levels must be >= 2");
  if (cfg.sample_rate == 0) fail(ErrorCode::kInvalidConfig, "sample_rate must be >= 1");

  std::vector<LayerSpec> specs;
  specs.reserve(cfg.total_layers());
  for (std::size_t b = 1; b <= cfg.num_blocks; ++b) {
    for (std::size_t l = 1; l <= cfg.layers_per_block; ++l) {
      LayerSpec s;
      s.block_index = b;
      s.layer_index = l;
      s.in_channels = (b == 1 && l == 1) ? 1 : cfg.channels;
      s.out_channels = cfg.channels;
      s.dilation = std::size_t{1} << (l - 1);
      s.queue_length = s.dilation;
      specs.push_back(s);
    }
  }
  return specs;
}

QueueMemory estimate_queue_memory(const ModelConfig& cfg) {
  QueueMemory mem;
  for (const LayerSpec& s : validate_config(cfg)) {
    mem.per_layer.push_back(s.queue_elements());
    mem.total += s.queue_elements();
  }
  return mem;
}

std::size_t receptive_field(const ModelConfig& cfg) {
  std::size_t field = 1;
  for (const LayerSpec& s : validate_config(cfg)) field += s.dilation * (cfg.filter_width - 1);
  return field;
}

void check_weights(const ModelConfig& cfg, const WeightSet& ws) {
  const auto specs = validate_config(cfg);
  if (ws.kernels.size() != specs.size()) {
    fail(ErrorCode::kShapeMismatch, "weight set has " + std::to_string(ws.kernels.size()) +
                                        " kernel pairs, config has " +
                                        std::to_string(specs.size()) + " layers");
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& k = ws.kernels[i];
    for (const Matrix<float>* m : {&k.past, &k.current}) {
      if (m->rows() != specs[i].out_channels || m->cols() != specs[i].in_channels) {
        fail(ErrorCode::kShapeMismatch, "kernel of layer " + std::to_string(i) + " is " +
                                            std::to_string(m->rows()) + "x" +
                                            std::to_string(m->cols()));
      }
    }
  }
  if (ws.fc_weight.rows() != final_out_channels(specs) || ws.fc_weight.cols() != cfg.quant_levels) {
    fail(ErrorCode::kShapeMismatch, "fc weight shape does not match config");
  }
  if (ws.fc_bias.size() != cfg.quant_levels) {
    fail(ErrorCode::kShapeMismatch, "fc bias length does not match quant_levels");
  }
}

WeightSet zero_weights(const ModelConfig& cfg) {
  const auto specs = validate_config(cfg);
  WeightSet ws;
  for (const LayerSpec& s : specs) {
    ws.kernels.push_back({Matrix<float>(s.out_channels, s.in_channels),
                          Matrix<float>(s.out_channels, s.in_channels)});
  }
  ws.fc_weight = Matrix<float>(final_out_channels(specs), cfg.quant_levels);
  ws.fc_bias.assign(cfg.quant_levels, 0.0f);
  return ws;
}

WeightSet random_weights(const ModelConfig& cfg, std::uint64_t seed, double scale) {
  if (!(scale > 0.0)) fail(ErrorCode::kInvalidArgument, "scale must be > 0");
  WeightSet ws = zero_weights(cfg);
  // mt19937_64's output sequence is fixed by the standard; the mapping to
  // [-scale, scale] is done by hand so results do not depend on the
  // standard library's distribution implementation.
  std::mt19937_64 rng(seed);
  auto draw = [&]() {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return static_cast<float>(scale * (2.0 * u - 1.0));
  };
  for (auto& k : ws.kernels) {
    for (float& v : k.past.flat()) v = draw();
    for (float& v : k.current.flat()) v = draw();
  }
  for (float& v : ws.fc_weight.flat()) v = draw();
  for (float& v : ws.fc_bias) v = draw();
  return ws;
}

std::vector<std::uint8_t> encode_weights(const ModelConfig& cfg, const WeightSet& ws) {
  check_weights(cfg, ws);
  std::vector<std::uint8_t> out(kWeightMagic.begin(), kWeightMagic.end());
  for (std::uint32_t v : {cfg.num_blocks, cfg.layers_per_block, cfg.filter_width, cfg.channels,
                          cfg.quant_levels, cfg.sample_rate}) {
    put_u32(out, v);
  }
  for (const auto& k : ws.kernels) {
    put_matrix(out, k.past);
    put_matrix(out, k.current);
  }
  put_matrix(out, ws.fc_weight);
  for (float v : ws.fc_bias) put_f32(out, v);
  return out;
}

WeightFile decode_weights(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  auto magic = in.take(kWeightMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kWeightMagic.begin())) {
    fail(ErrorCode::kMagicMismatch, "not a weight file (bad magic)");
  }
  WeightFile file;
  ModelConfig& cfg = file.config;
  cfg.num_blocks = in.u32("header");
  cfg.layers_per_block = in.u32("header");
  cfg.filter_width = in.u32("header");
  cfg.channels = in.u32("header");
  cfg.quant_levels = in.u32("header");
  cfg.sample_rate = in.u32("header");

  const auto specs = validate_config(cfg);
  std::size_t floats = final_out_channels(specs) * cfg.quant_levels + cfg.quant_levels;
  for (const LayerSpec& s : specs) floats += 2 * s.in_channels * s.out_channels;
  if (in.remaining() / 4 < floats) {
    fail(ErrorCode::kTruncatedFile, "file holds " + std::to_string(in.remaining()) +
                                        " data bytes, header implies " +
                                        std::to_string(4 * floats));
  }

  file.weights = zero_weights(cfg);
  for (auto& k : file.weights.kernels) {
    in.fill(k.past, "kernel");
    in.fill(k.current, "kernel");
  }
  in.fill(file.weights.fc_weight, "fc weight");
  for (float& v : file.weights.fc_bias) v = in.f32("fc bias");
  if (in.remaining() != 0) {
    fail(ErrorCode::kShapeMismatch,
         std::to_string(in.remaining()) + " trailing bytes after fc bias");
  }
  return file;
}

void save_weights(const std::filesystem::path& path, const ModelConfig& cfg, const WeightSet& ws) {
  const auto bytes = encode_weights(cfg, ws);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

WeightFile read_weight_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_weights(bytes);
}

WeightSet load_weights(const std::filesystem::path& path, const ModelConfig& cfg) {
  WeightFile file = read_weight_file(path);
  if (!(file.config == cfg)) {
    fail(ErrorCode::kShapeMismatch, "weight file header does not match the given config");
  }
  return std::move(file.weights);
}

ModelConfig parse_config_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kInvalidConfig, "config must be a JSON object");
  ModelConfig cfg;
  auto field = [&](const char* key, std::uint32_t& dst) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0 ||
        v.get<std::int64_t>() > std::int64_t{UINT32_MAX}) {
      fail(ErrorCode::kInvalidConfig, std::string("config key '") + key +
                                          "' must be a non-negative integer");
    }
    dst = v.get<std::uint32_t>();
  };
  field("num_blocks", cfg.num_blocks);
  field("layers_per_block", cfg.layers_per_block);
  field("filter_width", cfg.filter_width);
  field("channels", cfg.channels);
  field("quant_levels", cfg.quant_levels);
  field("sample_rate", cfg.sample_rate);
  return cfg;
}

std::string config_to_json(const ModelConfig& cfg) {
  nlohmann::ordered_json j;
  j["num_blocks"] = cfg.num_blocks;
  j["layers_per_block"] = cfg.layers_per_block;
  j["filter_width"] = cfg.filter_width;
  j["channels"] = cfg.channels;
  j["quant_levels"] = cfg.quant_levels;
  j["sample_rate"] = cfg.sample_rate;
  return j.dump(2) + "\n";
}

ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_json(text);
}

void save_config(const std::filesystem::path& path, const ModelConfig& cfg) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << config_to_json(cfg);
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace fastwave
