#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fastwave/tensor.hpp"

namespace fastwave {

// Network description. Defaults reproduce the 2 x 14 x 128 architecture.
struct ModelConfig {
  std::uint32_t num_blocks = 2;
  std::uint32_t layers_per_block = 14;
  std::uint32_t filter_width = 2;
  std::uint32_t channels = 128;
  std::uint32_t quant_levels = 256;
  std::uint32_t sample_rate = 16000;

  std::size_t total_layers() const noexcept {
    return std::size_t{num_blocks} * layers_per_block;
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Layer indices are 1-based within a block, matching how layers are usually
// referred to ("block 1 layer 14").
struct LayerSpec {
  std::size_t block_index = 0;
  std::size_t layer_index = 0;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t dilation = 0;
  std::size_t queue_length = 0;

  std::size_t queue_elements() const noexcept { return queue_length * in_channels; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// One dilated width-2 kernel: `past` multiplies the queued input from
// `dilation` steps ago, `current` multiplies the previous layer's output.
struct KernelPair {
  Matrix<float> past;     // OC x IC
  Matrix<float> current;  // OC x IC

  friend bool operator==(const KernelPair&, const KernelPair&) = default;
};

struct WeightSet {
  std::vector<KernelPair> kernels;  // block-major, then layer
  Matrix<float> fc_weight;          // channels x quant_levels
  Vector<float> fc_bias;            // quant_levels

  friend bool operator==(const WeightSet&, const WeightSet&) = default;
};

struct QueueMemory {
  std::vector<std::size_t> per_layer;
  std::size_t total = 0;
};

// Throws Error{kInvalidFilterWidth | kZeroChannels | kZeroLayers | kInvalidConfig}.
std::vector<LayerSpec> validate_config(const ModelConfig& cfg);

QueueMemory estimate_queue_memory(const ModelConfig& cfg);

// Exact receptive field of the dilated stack: 1 + sum of dilation * (width - 1).
std::size_t receptive_field(const ModelConfig& cfg);

// Checks every shape in `ws` against `cfg`; throws kShapeMismatch.
void check_weights(const ModelConfig& cfg, const WeightSet& ws);

// Uniform in [-scale, scale], deterministic in `seed`.
WeightSet random_weights(const ModelConfig& cfg, std::uint64_t seed, double scale);

// All-zero weights with the right shapes.
WeightSet zero_weights(const ModelConfig& cfg);

// Binary weight file: "FWAVE001", six u32 config fields, then float32 data,
// all little-endian. See README for the exact layout.
inline constexpr std::string_view kWeightMagic = "FWAVE001";

void save_weights(const std::filesystem::path& path, const ModelConfig& cfg, const WeightSet& ws);
std::vector<std::uint8_t> encode_weights(const ModelConfig& cfg, const WeightSet& ws);

struct WeightFile {
  ModelConfig config;
  WeightSet weights;
};

WeightFile decode_weights(std::span<const std::uint8_t> bytes);
WeightFile read_weight_file(const std::filesystem::path& path);

// Reads the file and requires its header to describe `cfg`.
WeightSet load_weights(const std::filesystem::path& path, const ModelConfig& cfg);

ModelConfig parse_config_json(std::string_view text);
std::string config_to_json(const ModelConfig& cfg);
ModelConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ModelConfig& cfg);

}  // namespace fastwave
