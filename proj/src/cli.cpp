#include "fastwave/cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "fastwave/conv_queue.hpp"
#include "fastwave/inference.hpp"
#include "fastwave/metrics.hpp"
#include "fastwave/wav.hpp"
#include "json.hpp"

namespace fastwave {
namespace {

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::kIo, "sha256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Optional "number_mode" key in the config JSON supplies the default mode.
std::string config_number_mode(const std::string& path) {
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_object() && j.contains("number_mode") && j["number_mode"].is_string()) {
    return j["number_mode"].get<std::string>();
  }
  return "real";
}

// ------------------------------------------------------------------ generate

struct GenerateArgs {
  std::string config;
  std::string weights;
  double seconds = 0.0;
  std::string mode;
  std::string out;
  std::string report;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  const ModelConfig json_cfg = load_config(a.config);
  const auto weight_bytes = read_bytes(a.weights);
  WeightFile file = decode_weights(weight_bytes);
  if (!(file.config == json_cfg)) {
    err << "warning: " << a.config << " differs from the header of " << a.weights
        << "; using the weight file header\n";
  }
  const ModelConfig& cfg = file.config;
  const NumberMode mode = parse_number_mode(a.mode.empty() ? config_number_mode(a.config) : a.mode);
  if (!(a.seconds > 0.0)) fail(ErrorCode::kInvalidArgument, "--seconds must be > 0");
  const auto n = static_cast<std::size_t>(std::llround(a.seconds * cfg.sample_rate));
  if (n == 0) fail(ErrorCode::kInvalidArgument, "--seconds yields zero samples");

  const ParallelismPlan plan = ParallelismPlan::defaults(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const Waveform wave = generate(cfg, file.weights, {}, n, mode, plan);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_wav(a.out, wave);

  const double throughput = wall > 0.0 ? static_cast<double>(n) / wall : 0.0;
  out << "generated " << n << " samples in " << wall << " s (" << throughput << " samples/s, "
      << number_mode_name(mode) << ", " << backend_name(active_backend()) << ") -> " << a.out << "\n";

  if (!a.report.empty()) {
    nlohmann::ordered_json r;
    r["samples_generated"] = n;
    r["wall_time"] = wall;
    r["throughput_hz"] = throughput;
    r["number_mode"] = number_mode_name(mode);
    r["kernel_backend"] = backend_name(active_backend());
    r["sample_rate"] = cfg.sample_rate;
    const auto specs = validate_config(cfg);
    nlohmann::ordered_json layers = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < specs.size(); ++i) {
      layers.push_back({{"block", specs[i].block_index},
                        {"layer", specs[i].layer_index},
                        {"num_parallel_out", plan.layers[i].num_parallel_out},
                        {"num_parallel_in", plan.layers[i].num_parallel_in}});
    }
    r["parallelism"] = layers;
    r["fc_parallelism"] = {{"num_parallel_out", plan.fc.num_parallel_out},
                           {"num_parallel_in", plan.fc.num_parallel_in}};
    const std::string cfg_text = config_to_json(cfg);
    r["config_sha256"] = sha256_hex({reinterpret_cast<const std::uint8_t*>(cfg_text.data()), cfg_text.size()});
    r["weights_sha256"] = sha256_hex(weight_bytes);
    std::ofstream rf(a.report, std::ios::trunc);
    if (!rf) fail(ErrorCode::kIo, "cannot open " + a.report + " for writing");
    rf << r.dump(2) << "\n";
  }
  return 0;
}

// -------------------------------------------------------------------- verify

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

CheckResult check_generation(const ModelConfig& cfg, std::uint64_t seed, const NumberMode& mode) {
  const WeightSet ws = random_weights(cfg, seed, 0.25);
  Generator fast(cfg, ws, mode);
  NaiveGenerator naive(cfg, ws, mode);
  constexpr std::size_t kSteps = 200;
  double input_fast = 0.0;
  double input_naive = 0.0;
  double worst = 0.0;
  for (std::size_t t = 0; t < kSteps; ++t) {
    const auto b1 = fast.step(input_fast);
    const auto b2 = naive.step(input_naive);
    const auto l1 = fast.logits();
    const auto l2 = naive.logits();
    for (std::size_t i = 0; i < l1.size(); ++i) worst = std::max(worst, std::abs(l1[i] - l2[i]));
    if (b1 != b2) {
      return {"generate vs naive (" + number_mode_name(mode) + ")", false,
              "bins differ at step " + std::to_string(t)};
    }
    input_fast = dequantize(b1, cfg.quant_levels);
    input_naive = dequantize(b2, cfg.quant_levels);
  }
  std::ostringstream d;
  d << kSteps << " steps, max logit deviation " << worst;
  return {"generate vs naive (" + number_mode_name(mode) + ")", worst <= 1e-5, d.str()};
}

CheckResult check_matmul(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(-50, 50);
  std::size_t cases = 0;
  for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{16, 16}, {33, 20}, {128, 128}}) {
    Matrix<double> w(rows, cols);
    Vector<double> x(cols);
    for (double& v : w.flat()) v = dist(rng);
    for (double& v : x) v = dist(rng);
    Matrix<float> wf = map_matrix(w, [](double v) { return static_cast<float>(v); });
    std::vector<float> xf(x.begin(), x.end());
    for (std::size_t po : {1, 2, 4, 8}) {
      for (std::size_t pi : {1, 2, 4, 8}) {
        const auto got = matvec<RealOps<double>>(w, x, {}, {po, pi}, {});
        const auto got_f = matvec(wf, xf, {}, {po, pi});
        for (std::size_t r = 0; r < rows; ++r) {
          double expect = 0.0;
          for (std::size_t c = 0; c < cols; ++c) expect += w(r, c) * x[c];
          if (got[r] != expect || got_f[r] != static_cast<float>(expect)) {
            return {"matmul parity", false, "mismatch at p_out=" + std::to_string(po) +
                                                " p_in=" + std::to_string(pi)};
          }
        }
        ++cases;
      }
    }
  }
  return {"matmul parity", true, std::to_string(cases) + " shape/parallelism cases exact"};
}

CheckResult check_queue(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t length : {1, 2, 3, 7, 64}) {
    CyclicQueue<double> q(length, 3);
    std::deque<std::vector<double>> fifo(length, std::vector<double>(3, 0.0));
    for (int step = 0; step < 500; ++step) {
      const auto front = q.front();
      if (!std::equal(front.begin(), front.end(), fifo.front().begin())) {
        return {"queue/FIFO parity", false, "length " + std::to_string(length)};
      }
      std::vector<double> v{double(rng() % 1000), double(rng() % 1000), double(rng() % 1000)};
      q.push(v);
      fifo.pop_front();
      fifo.push_back(v);
    }
  }
  return {"queue/FIFO parity", true, "5 lengths x 500 pushes"};
}

ModelConfig load_verify_config(const std::string& path) {
  return path.empty() ? ModelConfig{} : load_config(path);
}

int cmd_verify(const std::string& config_path, std::uint64_t seed, std::ostream& out) {
  const ModelConfig cfg = reduced_config(load_verify_config(config_path));
  validate_config(cfg);
  out << "verify: " << cfg.num_blocks << " blocks x " << cfg.layers_per_block << " layers x "
      << cfg.channels << " channels, seed " << seed << ", kernels "
      << backend_name(active_backend()) << "\n";
  std::vector<CheckResult> results{
      check_generation(cfg, seed, NumberMode::real()),
      check_generation(cfg, seed, NumberMode::fixed_point(FxFormat{27, 8})),
      check_matmul(seed),
      check_queue(seed),
  };
  bool ok = true;
  for (const auto& r : results) {
    out << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

// ------------------------------------------------------------------- compare

struct CompareArgs {
  std::string a;
  std::string b;
  std::string stft = "512,128";
  std::string window = "hann";
  double epsilon = 1e-10;
  std::string export_a;
  std::string export_b;
};

SpectrogramParams parse_stft(const CompareArgs& c) {
  SpectrogramParams p;
  std::stringstream ss(c.stft);
  std::string tok;
  std::vector<std::size_t> nums;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      nums.push_back(std::stoul(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      fail(ErrorCode::kInvalidArgument, "--stft expects WINDOW,HOP, got '" + c.stft + "'");
    }
  }
  if (nums.size() != 2) fail(ErrorCode::kInvalidArgument, "--stft expects WINDOW,HOP");
  p.window_size = nums[0];
  p.hop = nums[1];
  p.window = c.window == "rect" ? WindowKind::kRectangular : WindowKind::kHann;
  p.epsilon = c.epsilon;
  validate(p);
  return p;
}

int cmd_compare(const CompareArgs& c, std::ostream& out, std::ostream& err) {
  const SpectrogramParams params = parse_stft(c);
  const WavData a = read_wav(c.a);
  const WavData b = read_wav(c.b);
  if (a.sample_rate != b.sample_rate) {
    err << "warning: sample rates differ (" << a.sample_rate << " vs " << b.sample_rate << ")\n";
  }
  const MetricReport r = compare_signals(a.samples, b.samples, params);
  out << std::setprecision(10) << "mse " << r.mse << "\nlsd " << r.lsd << "\nn_samples " << r.n_samples
      << "\n";
  if (!c.export_a.empty()) export_spectrogram(a.samples, params, c.export_a);
  if (!c.export_b.empty()) export_spectrogram(b.samples, params, c.export_b);
  return 0;
}

// ------------------------------------------------------------------- explore

int cmd_explore(const std::string& config_path, const std::vector<std::size_t>& pouts,
                const std::vector<std::size_t>& pins, const std::string& out_path, std::ostream& out) {
  const ModelConfig cfg = load_config(config_path);
  const auto specs = validate_config(cfg);
  for (std::size_t po : pouts)
    for (std::size_t pi : pins) validate(ParallelismParams{po, pi});

  std::ofstream file;
  std::ostream* sink = &out;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::trunc);
    if (!file) fail(ErrorCode::kIo, "cannot open " + out_path + " for writing");
    sink = &file;
  }
  std::ostream& csv = *sink;
  csv << "block,layer,rows,cols,num_parallel_out,num_parallel_in,mac_count,estimated_cycles,"
         "weight_buffer_elems,layer_cycles\n";
  auto emit = [&](const std::string& block, const std::string& layer, std::size_t rows,
                  std::size_t cols, std::size_t matvecs) {
    for (std::size_t po : pouts) {
      for (std::size_t pi : pins) {
        const CostEstimate c = estimate_cycles(rows, cols, {po, pi});
        csv << block << ',' << layer << ',' << rows << ',' << cols << ',' << po << ',' << pi << ','
            << c.mac_count << ',' << c.estimated_cycles << ',' << c.weight_buffer_elems << ','
            << matvecs * c.estimated_cycles << '\n';
      }
    }
  };
  // A conv layer is two matvecs of the same shape; the output layer is one.
  for (const LayerSpec& s : specs) {
    emit(std::to_string(s.block_index), std::to_string(s.layer_index), s.out_channels,
         s.in_channels, 2);
  }
  emit("fc", "fc", cfg.quant_levels, specs.back().out_channels, 1);
  return 0;
}

// ---------------------------------------------------------------------- init

int cmd_init(const std::string& config_path, std::uint64_t seed, double scale,
             const std::string& out_path, std::ostream& out) {
  const ModelConfig cfg = config_path.empty() ? ModelConfig{} : load_config(config_path);
  save_weights(out_path, cfg, random_weights(cfg, seed, scale));
  out << "wrote random weights (seed " << seed << ", scale " << scale << ") -> " << out_path << "\n";
  return 0;
}

}  // namespace

ModelConfig reduced_config(const ModelConfig& cfg) {
  ModelConfig r = cfg;
  r.num_blocks = std::min<std::uint32_t>(cfg.num_blocks, 2);
  r.layers_per_block = std::min<std::uint32_t>(cfg.layers_per_block, 5);
  r.channels = std::min<std::uint32_t>(cfg.channels, 8);
  return r;
}

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fastwave: autoregressive dilated-convolution audio generator"};
  app.name("fastwave");
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate audio and write a WAV file");
  g->add_option("--config", gen.config, "Model config JSON")->required();
  g->add_option("--weights", gen.weights, "Weight file")->required();
  g->add_option("--seconds", gen.seconds, "Seconds of audio")->required();
  g->add_option("--mode", gen.mode, "real | fixed<T,I> (default: config number_mode or real)");
  g->add_option("--out", gen.out, "Output WAV path")->required();
  g->add_option("--report", gen.report, "Write a JSON run report here");

  std::string verify_config;
  std::uint64_t verify_seed = 1;
  auto* v = app.add_subcommand("verify", "Run the oracle-equivalence checks on a reduced config");
  v->add_option("--config", verify_config, "Model config JSON (default: built-in)");
  v->add_option("--seed", verify_seed, "Random seed");

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Print MSE and log-spectral distance of two WAV files");
  c->add_option("--a", cmp.a, "First WAV")->required();
  c->add_option("--b", cmp.b, "Second WAV")->required();
  c->add_option("--stft", cmp.stft, "WINDOW,HOP (default 512,128)");
  c->add_option("--window", cmp.window, "hann | rect")->check(CLI::IsMember({"hann", "rect"}));
  c->add_option("--epsilon", cmp.epsilon, "Log floor");
  c->add_option("--export-a", cmp.export_a, "Write the normalized log spectrogram of A as CSV");
  c->add_option("--export-b", cmp.export_b, "Write the normalized log spectrogram of B as CSV");

  std::string explore_config;
  std::string explore_out;
  std::vector<std::size_t> pouts{1, 2, 4, 8};
  std::vector<std::size_t> pins{1, 2, 4, 8};
  auto* e = app.add_subcommand("explore", "Emit cycle estimates per layer and parallelism as CSV");
  e->add_option("--config", explore_config, "Model config JSON")->required();
  e->add_option("--pout-list", pouts, "Comma-separated num_parallel_out values")->delimiter(',');
  e->add_option("--pin-list", pins, "Comma-separated num_parallel_in values")->delimiter(',');
  e->add_option("--out", explore_out, "CSV path (default stdout)");

  std::string init_config;
  std::string init_out;
  std::uint64_t init_seed = 7;
  double init_scale = 0.25;
  auto* i = app.add_subcommand("init", "Write a seeded random weight file");
  i->add_option("--config", init_config, "Model config JSON (default: built-in)");
  i->add_option("--seed", init_seed, "Random seed");
  i->add_option("--scale", init_scale, "Weights drawn from [-scale, scale]");
  i->add_option("--out", init_out, "Weight file path")->required();

  std::vector<std::string> argv_store{"fastwave"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (g->parsed()) return cmd_generate(gen, out, err);
    if (v->parsed()) return cmd_verify(verify_config, verify_seed, out);
    if (c->parsed()) return cmd_compare(cmp, out, err);
    if (e->parsed()) return cmd_explore(explore_config, pouts, pins, explore_out, out);
    if (i->parsed()) return cmd_init(init_config, init_seed, init_scale, init_out, out);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace fastwave
