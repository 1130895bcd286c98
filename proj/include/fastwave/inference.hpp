#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fastwave/arithmetic.hpp"
#include "fastwave/matmul.hpp"
#include "fastwave/model.hpp"

namespace fastwave {

// Linear quantization of [-1, 1] into `levels` bins. x is clamped first; NaN
// maps to 0. bin = round((x + 1) / 2 * (levels - 1)), ties away from zero.
std::uint32_t quantize(double x, std::uint32_t levels);
// 2 * bin / (levels - 1) - 1. Throws kBinOutOfRange.
double dequantize(std::uint32_t bin, std::uint32_t levels);

// Index of the largest logit, lowest index on ties. Throws kEmptyInput.
template <class T>
std::size_t argmax_sample(std::span<const T> logits) {
  if (logits.empty()) fail(ErrorCode::kEmptyInput, "argmax of no logits");
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

// logits[j] = sum_i x[i] * w(i, j) + b[j], with `w` stored channels x bins.
// Throws kShapeMismatch.
Vector<float> fc_forward(const Matrix<float>& w, std::span<const float> b, std::span<const float> x,
                         const ParallelismParams& p);

// Per-layer engine parameters plus those of the output layer.
struct ParallelismPlan {
  std::vector<ParallelismParams> layers;
  ParallelismParams fc;

  // p_out = 8, p_in = 4 everywhere except block 1 layer 1 (a single input
  // channel), which runs with 1 x 1.
  static ParallelismPlan defaults(const ModelConfig& cfg);
  static ParallelismPlan uniform(const ModelConfig& cfg, const ParallelismParams& p);
};

struct Waveform {
  std::vector<double> samples;
  std::vector<std::uint32_t> bins;
  std::uint32_t sample_rate = 0;
};

// One autoregressive session: owns every layer's queue and runs the network
// one input sample at a time. Not thread-safe; sessions are independent.
class Generator {
 public:
  Generator(const ModelConfig& cfg, const WeightSet& ws, const NumberMode& mode,
            const ParallelismPlan& plan);
  Generator(const ModelConfig& cfg, const WeightSet& ws, const NumberMode& mode);
  ~Generator();
  Generator(Generator&&) noexcept;
  Generator& operator=(Generator&&) noexcept;

  // Conv layers only (no output layer); used for teacher forcing.
  void advance(double input);
  // Conv layers, output layer and argmax. Returns the chosen bin.
  std::uint32_t step(double input);

  // Logits of the most recent step(), converted to real.
  std::vector<double> logits() const;
  // Output of layer `index` (block-major) after the most recent step.
  std::vector<double> layer_output(std::size_t index) const;

  std::size_t layer_count() const;
  std::uint64_t steps() const;
  std::uint64_t matvec_calls() const;
  std::vector<std::uint64_t> queue_pushes() const;

  class Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

// Reference generator: keeps the raw input history and, at every step,
// recomputes every layer's activations over the whole history with
// naive_dilated_conv. Per-step work grows with t.
class NaiveGenerator {
 public:
  NaiveGenerator(const ModelConfig& cfg, const WeightSet& ws, const NumberMode& mode,
                 const ParallelismPlan& plan);
  NaiveGenerator(const ModelConfig& cfg, const WeightSet& ws, const NumberMode& mode);
  ~NaiveGenerator();
  NaiveGenerator(NaiveGenerator&&) noexcept;
  NaiveGenerator& operator=(NaiveGenerator&&) noexcept;

  std::uint32_t step(double input);
  std::vector<double> logits() const;
  std::vector<double> layer_output(std::size_t index) const;
  std::uint64_t steps() const;
  std::uint64_t matvec_calls() const;

  class Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

// Seed samples are teacher-forced through the network to warm the queues;
// the output of the last seed step becomes the first fed-back input, and n
// further steps each emit one sample. An empty seed means a single zero
// sample. Every queue therefore receives len(seed) + n pushes.
// Throws kInvalidArgument (n == 0, seed outside [-1, 1]) and shape errors.
Waveform generate(const ModelConfig& cfg, const WeightSet& ws, std::span<const double> seed,
                  std::size_t n, const NumberMode& mode, const ParallelismPlan& plan);
Waveform generate(const ModelConfig& cfg, const WeightSet& ws, std::span<const double> seed,
                  std::size_t n, const NumberMode& mode);

Waveform generate_naive(const ModelConfig& cfg, const WeightSet& ws, std::span<const double> seed,
                        std::size_t n, const NumberMode& mode, const ParallelismPlan& plan);
Waveform generate_naive(const ModelConfig& cfg, const WeightSet& ws, std::span<const double> seed,
                        std::size_t n, const NumberMode& mode);

// Per-layer activations while driving the network with `input` regardless
// of what it predicts. traces[k] is (steps x channels) for layers[k].
struct LayerTraces {
  std::vector<std::size_t> layers;
  std::vector<Matrix<float>> traces;
};

// `layers` empty selects every layer.
LayerTraces teacher_forced_layer_outputs(const ModelConfig& cfg, const WeightSet& ws,
                                         std::span<const double> input, const NumberMode& mode,
                                         const ParallelismPlan& plan,
                                         std::span<const std::size_t> layers = {});
LayerTraces teacher_forced_layer_outputs(const ModelConfig& cfg, const WeightSet& ws,
                                         std::span<const double> input, const NumberMode& mode);

}  // namespace fastwave
