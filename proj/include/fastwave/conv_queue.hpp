#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fastwave/arithmetic.hpp"
#include "fastwave/model.hpp"
#include "fastwave/tensor.hpp"

namespace fastwave {

// Fixed-length ring of channel vectors. The slot at `head` is the oldest
// entry; a push overwrites it and advances head, so pop and push together
// cost one row write and nothing shifts.
template <class T>
class CyclicQueue {
 public:
  // Throws kZeroLength, kZeroChannels, kChannelMismatch (init of wrong length).
  CyclicQueue(std::size_t length, std::size_t channels,
              std::optional<std::span<const T>> init = std::nullopt)
      : storage_(checked_length(length), checked_channels(channels)) {
    if (init) {
      require_length(init->size(), channels, ErrorCode::kChannelMismatch, "queue init");
      for (std::size_t s = 0; s < length; ++s) std::copy_n(init->begin(), channels, storage_.row(s).begin());
    }
  }

  std::size_t length() const noexcept { return storage_.rows(); }
  std::size_t channels() const noexcept { return storage_.cols(); }
  std::size_t head() const noexcept { return head_; }
  std::size_t element_count() const noexcept { return storage_.size(); }
  std::uint64_t push_count() const noexcept { return pushes_; }

  std::span<const T> front() const noexcept { return storage_.row(head_); }

  void push(std::span<const T> v) {
    require_length(v.size(), channels(), ErrorCode::kChannelMismatch, "queue push");
    std::copy(v.begin(), v.end(), storage_.row(head_).begin());
    head_ = head_ + 1 == length() ? 0 : head_ + 1;
    ++pushes_;
  }

 private:
  static std::size_t checked_length(std::size_t n) {
    if (n == 0) fail(ErrorCode::kZeroLength, "queue length must be >= 1");
    return n;
  }
  static std::size_t checked_channels(std::size_t n) {
    if (n == 0) fail(ErrorCode::kZeroChannels, "queue channels must be >= 1");
    return n;
  }

  Matrix<T> storage_;
  std::size_t head_ = 0;
  std::uint64_t pushes_ = 0;
};

template <class Arith>
struct LayerWeights {
  typename Arith::matrix_type past;
  typename Arith::matrix_type current;
};

template <class T>
struct LayerState {
  LayerSpec spec;
  CyclicQueue<T> queue;
  Vector<T> last_output;
  Vector<T> scratch;

  explicit LayerState(const LayerSpec& s)
      : spec(s), queue(s.queue_length, s.in_channels), last_output(s.out_channels), scratch(s.out_channels) {}
};

// O = K_past * queue.front() + K_current * prev_out, optionally tanh'd, then
// prev_out is pushed. Returns a view of state.last_output.
// Throws kShapeMismatch.
template <class Arith>
std::span<const typename Arith::value_type> dilated_conv_step(
    LayerState<typename Arith::value_type>& state, std::span<const typename Arith::value_type> prev_out,
    const LayerWeights<Arith>& weights, const ParallelismParams& p, bool apply_tanh,
    const Arith& arith) {
  using V = typename Arith::value_type;
  require_length(prev_out.size(), state.spec.in_channels, ErrorCode::kShapeMismatch, "layer input");
  if (weights.past.rows() != state.spec.out_channels || weights.past.cols() != state.spec.in_channels ||
      weights.current.rows() != state.spec.out_channels ||
      weights.current.cols() != state.spec.in_channels) {
    fail(ErrorCode::kShapeMismatch, "kernel shape does not match layer spec");
  }
  std::span<V> out(state.last_output);
  std::span<V> tmp(state.scratch);
  arith.matvec(weights.past, state.queue.front(), {}, p, tmp);
  arith.matvec(weights.current, prev_out, {}, p, out);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const V sum = arith.add(tmp[i], out[i]);
    out[i] = apply_tanh ? arith.tanh(sum) : sum;
  }
  state.queue.push(prev_out);
  return out;
}

// Reference evaluation straight from the full input history of a layer:
// K_past * history[t - d] + K_current * history[t], zero before time 0.
// history[tau] is the layer input at time tau.
template <class Arith>
Vector<typename Arith::value_type> naive_dilated_conv(
    std::span<const Vector<typename Arith::value_type>> history, std::size_t t,
    const LayerWeights<Arith>& weights, std::size_t dilation, const ParallelismParams& p,
    const Arith& arith) {
  using V = typename Arith::value_type;
  if (t >= history.size()) fail(ErrorCode::kShapeMismatch, "history shorter than time index");
  const std::size_t in = weights.current.cols();
  const Vector<V> zeros(in, V{});
  std::span<const V> delayed = t >= dilation ? std::span<const V>(history[t - dilation]) : std::span<const V>(zeros);
  Vector<V> a(weights.past.rows());
  Vector<V> b(weights.current.rows());
  arith.matvec(weights.past, delayed, {}, p, a);
  arith.matvec(weights.current, history[t], {}, p, b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = arith.add(a[i], b[i]);
  return a;
}

}  // namespace fastwave
