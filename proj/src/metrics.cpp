#include "fastwave/metrics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>

namespace fastwave {
namespace {

std::vector<double> make_window(const SpectrogramParams& params) {
  std::vector<double> w(params.window_size, 1.0);
  if (params.window == WindowKind::kHann) {
    const double n = static_cast<double>(params.window_size);
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n);
    }
  }
  return w;
}

// FFTW's planner is not thread-safe; execution on a finished plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

void validate(const SpectrogramParams& params) {
  if (params.window_size < 2 || !std::has_single_bit(params.window_size)) {
    fail(ErrorCode::kInvalidArgument, "window_size must be a power of two >= 2");
  }
  if (params.hop == 0 || params.hop > params.window_size) {
    fail(ErrorCode::kInvalidArgument, "hop must be in [1, window_size]");
  }
  if (!(params.epsilon > 0.0)) fail(ErrorCode::kInvalidArgument, "epsilon must be > 0");
}

double mse(std::span<const double> a, std::span<const double> b) {
  require_length(b.size(), a.size(), ErrorCode::kLengthMismatch, "mse");
  if (a.empty()) fail(ErrorCode::kEmptyInput, "mse of empty signals");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

std::size_t frame_count(std::size_t signal_length, const SpectrogramParams& params) {
  validate(params);
  if (signal_length < params.window_size) return 0;
  return (signal_length - params.window_size) / params.hop + 1;
}

Matrix<std::complex<double>> stft(std::span<const double> x, const SpectrogramParams& params) {
  const std::size_t frames = frame_count(x.size(), params);
  if (frames == 0) {
    fail(ErrorCode::kSignalTooShort, "signal of " + std::to_string(x.size()) +
                                         " samples is shorter than one window of " +
                                         std::to_string(params.window_size));
  }
  const std::size_t n = params.window_size;
  const std::size_t bins = n / 2 + 1;
  const auto window = make_window(params);

  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(bins));
  std::unique_ptr<fftw_plan_s, PlanDeleter> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
  }

  Matrix<std::complex<double>> spec(frames, bins);
  for (std::size_t f = 0; f < frames; ++f) {
    const double* frame = x.data() + f * params.hop;
    for (std::size_t i = 0; i < n; ++i) in.get()[i] = frame[i] * window[i];
    fftw_execute(plan.get());
    for (std::size_t k = 0; k < bins; ++k) spec(f, k) = {out.get()[k][0], out.get()[k][1]};
  }
  return spec;
}

Matrix<double> normalized_log_spectrogram(std::span<const double> x, const SpectrogramParams& params) {
  const auto spec = stft(x, params);
  Matrix<double> ls = map_matrix(spec, [&](const std::complex<double>& c) {
    return std::log(std::norm(c) + params.epsilon);
  });
  const double count = static_cast<double>(ls.size());
  double mean = 0.0;
  for (double v : ls.flat()) mean += v;
  mean /= count;
  double var = 0.0;
  for (double v : ls.flat()) var += (v - mean) * (v - mean);
  var /= count;
  // A constant spectrogram leaves rounding residue in the mean; treat a
  // spread below that level as zero variance; centring then gives zeros.
  const double sd = std::sqrt(var);
  const bool flat = sd <= 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mean));
  for (double& v : ls.flat()) v = flat ? 0.0 : (v - mean) / sd;
  return ls;
}

double log_spectral_distance(std::span<const double> a, std::span<const double> b,
                             const SpectrogramParams& params) {
  require_length(b.size(), a.size(), ErrorCode::kLengthMismatch, "log_spectral_distance");
  const auto la = normalized_log_spectrogram(a, params);
  const auto lb = normalized_log_spectrogram(b, params);
  double sum = 0.0;
  for (std::size_t i = 0; i < la.size(); ++i) {
    const double d = la.flat()[i] - lb.flat()[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(la.size()));
}

MetricReport compare_signals(std::span<const double> a, std::span<const double> b,
                             const SpectrogramParams& params) {
  MetricReport r;
  r.mse = mse(a, b);
  r.lsd = log_spectral_distance(a, b, params);
  r.n_samples = a.size();
  return r;
}

void export_spectrogram(std::span<const double> x, const SpectrogramParams& params,
                        const std::filesystem::path& path) {
  const auto ls = normalized_log_spectrogram(x, params);
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!f) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  for (std::size_t r = 0; r < ls.rows(); ++r) {
    for (std::size_t c = 0; c < ls.cols(); ++c) {
      std::fprintf(f.get(), c == 0 ? "%.17g" : ",%.17g", ls(r, c));
    }
    std::fputc('\n', f.get());
  }
  if (std::ferror(f.get())) fail(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace fastwave
