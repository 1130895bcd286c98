#pragma once

// Independent reference implementations for tests. Nothing here calls into
// the library's arithmetic; everything is plain loops in double or long double.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fastwave/model.hpp"

namespace oracle {

using DMatrix = std::vector<std::vector<double>>;  // rows of columns

inline double sequential_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

inline double sequential_dot(const std::vector<double>& x, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * w[i];
  return s;
}

inline std::vector<double> naive_matvec(const DMatrix& w, const std::vector<double>& x) {
  std::vector<double> out;
  for (const auto& row : w) out.push_back(sequential_dot(x, row));
  return out;
}

template <class T>
DMatrix to_dmatrix(const fastwave::Matrix<T>& m) {
  DMatrix d(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) d[r][c] = static_cast<double>(m(r, c));
  return d;
}

// Shifting FIFO of fixed length, pre-filled with zero vectors.
class ShiftFifo {
 public:
  ShiftFifo(std::size_t length, std::size_t channels)
      : items_(length, std::vector<double>(channels, 0.0)) {}
  const std::vector<double>& front() const { return items_.front(); }
  void push(std::vector<double> v) {
    items_.pop_front();
    items_.push_back(std::move(v));
  }

 private:
  std::deque<std::vector<double>> items_;
};

// Naive O(N^2) DFT of one frame, first n/2+1 bins.
inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& frame) {
  const std::size_t n = frame.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<long double> acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const long double ang = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k * i % n) / n;
      acc += static_cast<long double>(frame[i]) * std::complex<long double>(std::cos(ang), std::sin(ang));
    }
    out[k] = {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
  }
  return out;
}

// Exact receptive field by walking the dependency graph of a dilated causal
// stack: the set of input offsets reachable from one output.
inline std::size_t traversal_receptive_field(const fastwave::ModelConfig& cfg) {
  std::vector<char> reach(1, 1);  // offsets back in time reachable from the output
  for (std::uint32_t b = 0; b < cfg.num_blocks; ++b) {
    for (std::uint32_t l = 0; l < cfg.layers_per_block; ++l) {
      const std::size_t d = std::size_t{1} << l;
      std::vector<char> next(reach.size() + d, 0);
      for (std::size_t o = 0; o < reach.size(); ++o) {
        if (!reach[o]) continue;
        next[o] = 1;      // current tap
        next[o + d] = 1;  // delayed tap
      }
      reach.swap(next);
    }
  }
  std::size_t n = 0;
  for (char c : reach) n += c != 0;
  return n;
}

// Direct evaluation of the dilated stack in double precision over a full
// input history: layer n at time t is tanh(K0 * a[t-d] + K1 * a[t]) with
// zero padding, where a is the previous layer's output sequence. Returns the
// activations of every layer at time history.size()-1 and the logits.
struct ReferenceOutputs {
  std::vector<std::vector<double>> layers;
  std::vector<double> logits;
};

inline ReferenceOutputs reference_network(const fastwave::ModelConfig& cfg,
                                          const fastwave::WeightSet& ws,
                                          const std::vector<double>& inputs) {
  const std::size_t T = inputs.size();
  std::vector<std::vector<double>> seq(T);
  for (std::size_t t = 0; t < T; ++t) seq[t] = {inputs[t]};
  ReferenceOutputs ref;
  std::size_t li = 0;
  for (std::uint32_t b = 0; b < cfg.num_blocks; ++b) {
    for (std::uint32_t l = 0; l < cfg.layers_per_block; ++l, ++li) {
      const std::size_t d = std::size_t{1} << l;
      const DMatrix k0 = to_dmatrix(ws.kernels[li].past);
      const DMatrix k1 = to_dmatrix(ws.kernels[li].current);
      std::vector<std::vector<double>> next(T);
      for (std::size_t t = 0; t < T; ++t) {
        const std::vector<double> zeros(seq[t].size(), 0.0);
        const auto& delayed = t >= d ? seq[t - d] : zeros;
        const auto a = naive_matvec(k0, delayed);
        const auto c = naive_matvec(k1, seq[t]);
        next[t].resize(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) next[t][i] = std::tanh(a[i] + c[i]);
      }
      seq.swap(next);
      ref.layers.push_back(seq.back());
    }
  }
  const auto& x = seq.back();
  for (std::size_t j = 0; j < ws.fc_weight.cols(); ++j) {
    double s = ws.fc_bias[j];
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * ws.fc_weight(i, j);
    ref.logits.push_back(s);
  }
  return ref;
}

// Weights on a coarse dyadic lattice: multiples of 1/8 in [-1/4, 1/4].
inline fastwave::WeightSet lattice_weights(const fastwave::ModelConfig& cfg, std::uint64_t seed) {
  fastwave::WeightSet ws = fastwave::zero_weights(cfg);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> k(-2, 2);
  for (auto& kp : ws.kernels) {
    for (float& v : kp.past.flat()) v = k(rng) / 8.0f;
    for (float& v : kp.current.flat()) v = k(rng) / 8.0f;
  }
  for (float& v : ws.fc_weight.flat()) v = k(rng) / 8.0f;
  for (float& v : ws.fc_bias) v = k(rng) / 8.0f;
  return ws;
}

// Per-test scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("fastwave_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
