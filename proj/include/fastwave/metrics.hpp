#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>

#include "fastwave/tensor.hpp"

namespace fastwave {

enum class WindowKind { kHann, kRectangular };

struct SpectrogramParams {
  std::size_t window_size = 512;
  std::size_t hop = 128;
  WindowKind window = WindowKind::kHann;
  double epsilon = 1e-10;
};

// Throws kInvalidArgument.
void validate(const SpectrogramParams& params);

struct MetricReport {
  double mse = 0.0;
  double lsd = 0.0;
  std::size_t n_samples = 0;
};

// Throws kLengthMismatch, kEmptyInput.
double mse(std::span<const double> a, std::span<const double> b);

std::size_t frame_count(std::size_t signal_length, const SpectrogramParams& params);

// frames x (window_size / 2 + 1). Periodic Hann window. Throws kSignalTooShort.
Matrix<std::complex<double>> stft(std::span<const double> x, const SpectrogramParams& params);

// log(|stft|^2 + epsilon), standardized to zero mean and unit variance over
// all time-frequency cells (a constant spectrogram maps to all zeros).
Matrix<double> normalized_log_spectrogram(std::span<const double> x, const SpectrogramParams& params);

// RMSE between the two normalized log spectrograms.
// Throws kLengthMismatch, kSignalTooShort.
double log_spectral_distance(std::span<const double> a, std::span<const double> b,
                             const SpectrogramParams& params);

MetricReport compare_signals(std::span<const double> a, std::span<const double> b,
                             const SpectrogramParams& params);

// CSV, one frame per line, bins across. Throws kIo.
void export_spectrogram(std::span<const double> x, const SpectrogramParams& params,
                        const std::filesystem::path& path);

}  // namespace fastwave
