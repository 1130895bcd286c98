#include "fastwave/inference.hpp"

#include <cmath>

#include "fastwave/conv_queue.hpp"

namespace fastwave {

std::uint32_t quantize(double x, std::uint32_t levels) {
  if (levels < 2) fail(ErrorCode::kInvalidArgument, "quantization needs >= 2 levels");
  if (std::isnan(x)) x = 0.0;
  x = std::clamp(x, -1.0, 1.0);
  return static_cast<std::uint32_t>(std::round((x + 1.0) / 2.0 * (levels - 1)));
}

double dequantize(std::uint32_t bin, std::uint32_t levels) {
  if (levels < 2) fail(ErrorCode::kInvalidArgument, "quantization needs >= 2 levels");
  if (bin >= levels) {
    fail(ErrorCode::kBinOutOfRange,
         "bin " + std::to_string(bin) + " outside [0, " + std::to_string(levels - 1) + "]");
  }
  return 2.0 * bin / (levels - 1) - 1.0;
}

Vector<float> fc_forward(const Matrix<float>& w, std::span<const float> b, std::span<const float> x,
                         const ParallelismParams& p) {
  require_length(x.size(), w.rows(), ErrorCode::kShapeMismatch, "fc input");
  require_length(b.size(), w.cols(), ErrorCode::kShapeMismatch, "fc bias");
  return matvec(w.transposed(), x, b, p);
}

ParallelismPlan ParallelismPlan::uniform(const ModelConfig& cfg, const ParallelismParams& p) {
  validate(p);
  ParallelismPlan plan;
  plan.layers.assign(cfg.total_layers(), p);
  plan.fc = p;
  return plan;
}

ParallelismPlan ParallelismPlan::defaults(const ModelConfig& cfg) {
  ParallelismPlan plan = uniform(cfg, {8, 4});
  if (!plan.layers.empty()) plan.layers.front() = {1, 1};
  return plan;
}

namespace {

void check_plan(const ModelConfig& cfg, const ParallelismPlan& plan) {
  if (plan.layers.size() != cfg.total_layers()) {
    fail(ErrorCode::kInvalidArgument, "parallelism plan has " + std::to_string(plan.layers.size()) +
                                          " layer entries, model has " +
                                          std::to_string(cfg.total_layers()));
  }
  for (const auto& p : plan.layers) validate(p);
  validate(plan.fc);
}

template <class Arith>
Arith make_arith(const NumberMode& mode, std::uint64_t* counter) {
  Arith a;
  if constexpr (std::is_same_v<Arith, FixedArithmetic>) a.format = mode.format;
  a.matvec_calls = counter;
  return a;
}

// Weights converted once into the session's number type. The output layer is
// stored transposed (bins x channels) so it runs through the same engine.
template <class Arith>
struct PreparedWeights {
  std::vector<LayerWeights<Arith>> layers;
  typename Arith::matrix_type fc_t;
  Vector<typename Arith::value_type> fc_bias;

  PreparedWeights(const WeightSet& ws, const Arith& arith) : fc_t(arith.prepare(ws.fc_weight.transposed())) {
    layers.reserve(ws.kernels.size());
    for (const auto& k : ws.kernels) layers.push_back({arith.prepare(k.past), arith.prepare(k.current)});
    for (float b : ws.fc_bias) fc_bias.push_back(arith.from_real(b));
  }
};

template <class Arith, class T>
std::vector<double> to_real_vector(const Arith& arith, std::span<const T> v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const T& x : v) out.push_back(arith.to_real(x));
  return out;
}

}  // namespace

// ------------------------------------------------------------------ Generator

class Generator::Impl {
 public:
  virtual ~Impl() = default;
  virtual void advance(double input) = 0;
  virtual std::uint32_t step(double input) = 0;
  virtual std::vector<double> logits() const = 0;
  virtual std::vector<double> layer_output(std::size_t index) const = 0;
  virtual std::size_t layer_count() const = 0;
  virtual std::uint64_t steps() const = 0;
  virtual std::uint64_t matvec_calls() const = 0;
  virtual std::vector<std::uint64_t> queue_pushes() const = 0;
};

namespace {

template <class Arith>
class QueueSession final : public Generator::Impl {
  using V = typename Arith::value_type;

 public:
  QueueSession(const ModelConfig& cfg, const WeightSet& ws, const NumberMode& mode,
               const ParallelismPlan& plan)
      : arith_(make_arith<Arith>(mode, &calls_)), plan_(plan), weights_(ws, arith_),
        logits_(cfg.quant_levels), input_(1) {
    for (const LayerSpec& s : validate_config(cfg)) layers_.emplace_back(s);
  }

  void advance(double input) override {
    input_[0] = arith_.from_real(input);
    std::span<const V> prev = input_;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      prev = dilated_conv_step(layers_[l], prev, weights_.layers[l], plan_.layers[l], true, arith_);
    }
    ++steps_;
  }

  std::uint32_t step(double input) override {
    advance(input);
    arith_.matvec(weights_.fc_t, layers_.back().last_output, weights_.fc_bias, plan_.fc, logits_);
    return static_cast<std::uint32_t>(argmax_sample<V>(logits_));
  }

  std::vector<double> logits() const override { return to_real_vector<Arith, V>(arith_, logits_); }

  std::vector<double> layer_output(std::size_t index) const override {
    if (index >= layers_.size()) fail(ErrorCode::kInvalidArgument, "layer index out of range");
    return to_real_vector<Arith, V>(arith_, layers_[index].last_output);
  }

  std::size_t layer_count() const override { return layers_.size(); }
  std::uint64_t steps() const override { return steps_; }
  std::uint64_t matvec_calls() const override { return calls_; }

  std::vector<std::uint64_t> queue_pushes() const override {
    std::vector<std::uint64_t> out;
    for (const auto& l : layers_) out.push_back(l.queue.push_count());
    return out;
  }

 private:
  std::uint64_t calls_ = 0;
  std::uint64_t steps_ = 0;
  Arith arith_;
  ParallelismPlan plan_;
  PreparedWeights<Arith> weights_;
  std::vector<LayerState<V>> layers_;
  Vector<V> logits_;
  Vector<V> input_;
};

template <template <class> class Session, class Base>
std::unique_ptr<Base> make_session(const ModelConfig& cfg, const WeightSet& ws,
                                   const NumberMode& mode, const ParallelismPlan& plan) {
  check_weights(cfg, ws);
  check_plan(cfg, plan);
  if (mode.fixed) {
    if (!mode.format.valid()) fail(ErrorCode::kInvalidFormat, format_name(mode.format));
    return std::make_unique<Session<FixedArithmetic>>(cfg, ws, mode, plan);
  }
  return std::make_unique<Session<RealArithmetic>>(cfg, ws, mode, plan);
}

}  // namespace

Generator::Generator(const ModelConfig& cfg, const WeightSet& ws, const NumberMode& mode,
                     const ParallelismPlan& plan)
    : impl_(make_session<QueueSession, Impl>(cfg, ws, mode, plan)) {}
Generator::Generator(const ModelConfig& cfg, const WeightSet& ws, const NumberMode& mode)
    : Generator(cfg, ws, mode, ParallelismPlan::defaults(cfg)) {}
Generator::~Generator() = default;
Generator::Generator(Generator&&) noexcept = default;
Generator& Generator::operator=(Generator&&) noexcept = default;

void Generator::advance(double input) { impl_->advance(input); }
std::uint32_t Generator::step(double input) { return impl_->step(input); }
std::vector<double> Generator::logits() const { return impl_->logits(); }
std::vector<double> Generator::layer_output(std::size_t index) const { return impl_->layer_output(index); }
std::size_t Generator::layer_count() const { return impl_->layer_count(); }
std::uint64_t Generator::steps() const { return impl_->steps(); }
std::uint64_t Generator::matvec_calls() const { return impl_->matvec_calls(); }
std::vector<std::uint64_t> Generator::queue_pushes() const { return impl_->queue_pushes(); }

// ------------------------------------------------------------- NaiveGenerator

class NaiveGenerator::Impl {
 public:
  virtual ~Impl() = default;
  virtual std::uint32_t step(double input) = 0;
  virtual std::vector<double> logits() const = 0;
  virtual std::vector<double> layer_output(std::size_t index) const = 0;
  virtual std::uint64_t steps() const = 0;
  virtual std::uint64_t matvec_calls() const = 0;
};

namespace {

template <class Arith>
class HistorySession final : public NaiveGenerator::Impl {
  using V = typename Arith::value_type;

 public:
  HistorySession(const ModelConfig& cfg, const WeightSet& ws, const NumberMode& mode,
                 const ParallelismPlan& plan)
      : arith_(make_arith<Arith>(mode, &calls_)), plan_(plan), weights_(ws, arith_),
        specs_(validate_config(cfg)), activations_(specs_.size()), logits_(cfg.quant_levels) {}

  std::uint32_t step(double input) override {
    inputs_.push_back(Vector<V>{arith_.from_real(input)});
    const std::size_t t = inputs_.size();
    // Nothing is cached between steps: every layer is rebuilt over the
    // whole history from the raw inputs.
    for (std::size_t l = 0; l < specs_.size(); ++l) {
      const std::vector<Vector<V>>& in = l == 0 ? inputs_ : activations_[l - 1];
      auto& out = activations_[l];
      out.resize(t);
      for (std::size_t tau = 0; tau < t; ++tau) {
        out[tau] = naive_dilated_conv<Arith>(in, tau, weights_.layers[l], specs_[l].dilation,
                                             plan_.layers[l], arith_);
        for (V& v : out[tau]) v = arith_.tanh(v);
      }
    }
    arith_.matvec(weights_.fc_t, activations_.back().back(), weights_.fc_bias, plan_.fc, logits_);
    return static_cast<std::uint32_t>(argmax_sample<V>(logits_));
  }

  std::vector<double> logits() const override { return to_real_vector<Arith, V>(arith_, logits_); }

  std::vector<double> layer_output(std::size_t index) const override {
    if (index >= specs_.size() || activations_[index].empty()) {
      fail(ErrorCode::kInvalidArgument, "no output for layer " + std::to_string(index));
    }
    return to_real_vector<Arith, V>(arith_, activations_[index].back());
  }

  std::uint64_t steps() const override { return inputs_.size(); }
  std::uint64_t matvec_calls() const override { return calls_; }

 private:
  std::uint64_t calls_ = 0;
  Arith arith_;
  ParallelismPlan plan_;
  PreparedWeights<Arith> weights_;
  std::vector<LayerSpec> specs_;
  std::vector<Vector<V>> inputs_;
  std::vector<std::vector<Vector<V>>> activations_;
  Vector<V> logits_;
};

}  // namespace

NaiveGenerator::NaiveGenerator(const ModelConfig& cfg, const WeightSet& ws, const NumberMode& mode,
                               const ParallelismPlan& plan)
    : impl_(make_session<HistorySession, Impl>(cfg, ws, mode, plan)) {}
NaiveGenerator::NaiveGenerator(const ModelConfig& cfg, const WeightSet& ws, const NumberMode& mode)
    : NaiveGenerator(cfg, ws, mode, ParallelismPlan::defaults(cfg)) {}
NaiveGenerator::~NaiveGenerator() = default;
NaiveGenerator::NaiveGenerator(NaiveGenerator&&) noexcept = default;
NaiveGenerator& NaiveGenerator::operator=(NaiveGenerator&&) noexcept = default;

std::uint32_t NaiveGenerator::step(double input) { return impl_->step(input); }
std::vector<double> NaiveGenerator::logits() const { return impl_->logits(); }
std::vector<double> NaiveGenerator::layer_output(std::size_t index) const {
  return impl_->layer_output(index);
}
std::uint64_t NaiveGenerator::steps() const { return impl_->steps(); }
std::uint64_t NaiveGenerator::matvec_calls() const { return impl_->matvec_calls(); }

// ------------------------------------------------------------------ generate

namespace {

void check_generate_args(std::span<const double> seed, std::size_t n) {
  if (n == 0) fail(ErrorCode::kInvalidArgument, "n must be >= 1");
  for (double s : seed) {
    if (!(s >= -1.0 && s <= 1.0)) fail(ErrorCode::kInvalidArgument, "seed samples must lie in [-1, 1]");
  }
}

template <class Gen>
Waveform run_autoregressive(Gen& gen, const ModelConfig& cfg, std::span<const double> seed,
                            std::size_t n) {
  const std::vector<double> zero_seed{0.0};
  if (seed.empty()) seed = zero_seed;
  std::uint32_t bin = 0;
  for (double s : seed) bin = gen.step(s);
  double input = dequantize(bin, cfg.quant_levels);

  Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples.reserve(n);
  w.bins.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    bin = gen.step(input);
    input = dequantize(bin, cfg.quant_levels);
    w.bins.push_back(bin);
    w.samples.push_back(input);
  }
  return w;
}

}  // namespace

Waveform generate(const ModelConfig& cfg, const WeightSet& ws, std::span<const double> seed,
                  std::size_t n, const NumberMode& mode, const ParallelismPlan& plan) {
  check_generate_args(seed, n);
  Generator gen(cfg, ws, mode, plan);
  return run_autoregressive(gen, cfg, seed, n);
}

Waveform generate(const ModelConfig& cfg, const WeightSet& ws, std::span<const double> seed,
                  std::size_t n, const NumberMode& mode) {
  return generate(cfg, ws, seed, n, mode, ParallelismPlan::defaults(cfg));
}

Waveform generate_naive(const ModelConfig& cfg, const WeightSet& ws, std::span<const double> seed,
                        std::size_t n, const NumberMode& mode, const ParallelismPlan& plan) {
  check_generate_args(seed, n);
  NaiveGenerator gen(cfg, ws, mode, plan);
  return run_autoregressive(gen, cfg, seed, n);
}

Waveform generate_naive(const ModelConfig& cfg, const WeightSet& ws, std::span<const double> seed,
                        std::size_t n, const NumberMode& mode) {
  return generate_naive(cfg, ws, seed, n, mode, ParallelismPlan::defaults(cfg));
}

LayerTraces teacher_forced_layer_outputs(const ModelConfig& cfg, const WeightSet& ws,
                                         std::span<const double> input, const NumberMode& mode,
                                         const ParallelismPlan& plan,
                                         std::span<const std::size_t> layers) {
  Generator gen(cfg, ws, mode, plan);
  LayerTraces out;
  if (layers.empty()) {
    for (std::size_t l = 0; l < gen.layer_count(); ++l) out.layers.push_back(l);
  } else {
    out.layers.assign(layers.begin(), layers.end());
  }
  const auto specs = validate_config(cfg);
  for (std::size_t l : out.layers) {
    if (l >= specs.size()) fail(ErrorCode::kInvalidArgument, "layer index out of range");
    out.traces.emplace_back(input.size(), specs[l].out_channels);
  }
  for (std::size_t t = 0; t < input.size(); ++t) {
    gen.advance(input[t]);
    for (std::size_t k = 0; k < out.layers.size(); ++k) {
      const auto v = gen.layer_output(out.layers[k]);
      auto row = out.traces[k].row(t);
      for (std::size_t c = 0; c < v.size(); ++c) row[c] = static_cast<float>(v[c]);
    }
  }
  return out;
}

LayerTraces teacher_forced_layer_outputs(const ModelConfig& cfg, const WeightSet& ws,
                                         std::span<const double> input, const NumberMode& mode) {
  return teacher_forced_layer_outputs(cfg, ws, input, mode, ParallelismPlan::defaults(cfg));
}

}  // namespace fastwave
