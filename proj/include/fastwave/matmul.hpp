#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fastwave/fixed_point.hpp"
#include "fastwave/tensor.hpp"

namespace fastwave {

// Two levels of parallelism of the matrix-vector engine: how many output
// rows are in flight together, and how many strided partial accumulators
// each dot product keeps before the tree reduction.
struct ParallelismParams {
  std::size_t num_parallel_out = 1;
  std::size_t num_parallel_in = 1;

  friend bool operator==(const ParallelismParams&, const ParallelismParams&) = default;
};

// Throws kInvalidArgument unless both are >= 1 and num_parallel_in is a power of two.
void validate(const ParallelismParams& p);

struct CostEstimate {
  std::uint64_t mac_count = 0;
  std::uint64_t estimated_cycles = 0;
  std::uint64_t weight_buffer_elems = 0;

  friend bool operator==(const CostEstimate&, const CostEstimate&) = default;
};

// ceil(M / p_out) * (ceil(N / p_in) + log2(p_in) + 1) cycles; one MAC per lane
// per cycle, the reduction tree depth, and one accumulate.
CostEstimate estimate_cycles(std::size_t rows, std::size_t cols, const ParallelismParams& p);

// Arithmetic policies. Every kernel is written once against these so the
// real and fixed-point paths share the exact same evaluation order.
template <class T>
struct RealOps {
  using value_type = T;
  static T mul(T a, T b) noexcept { return a * b; }
  static T add(T a, T b) noexcept { return a + b; }
};

struct FixedOps {
  using value_type = std::int64_t;
  FxFormat format{};
  std::int64_t mul(std::int64_t a, std::int64_t b) const noexcept { return fx::mul_raw(a, b, format); }
  std::int64_t add(std::int64_t a, std::int64_t b) const noexcept { return fx::add_raw(a, b, format); }
};

namespace detail {

// Pairwise tree reduction in place over `buf`, ping-ponging with `scratch`.
// Odd trailing elements pass to the next level unchanged.
template <class Ops>
typename Ops::value_type tree_reduce(std::span<typename Ops::value_type> buf,
                                     std::span<typename Ops::value_type> scratch,
                                     const Ops& ops) {
  auto* src = buf.data();
  auto* dst = scratch.data();
  std::size_t n = buf.size();
  while (n > 1) {
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i) dst[i] = ops.add(src[2 * i], src[2 * i + 1]);
    if (n % 2 == 1) dst[half] = src[n - 1];
    n = half + n % 2;
    std::swap(src, dst);
  }
  return src[0];
}

inline constexpr std::size_t kMaxInlinePartials = 64;

}  // namespace detail

// Tree reduction of the partial sums. Throws kEmptyInput.
template <class Ops>
typename Ops::value_type reduce_sum(std::span<const typename Ops::value_type> partials,
                                    const Ops& ops) {
  using V = typename Ops::value_type;
  if (partials.empty()) fail(ErrorCode::kEmptyInput, "reduce_sum of no values");
  std::vector<V> a(partials.begin(), partials.end());
  std::vector<V> temp(a.size());
  return detail::tree_reduce<Ops>(a, temp, ops);
}

template <class T>
T reduce_sum(std::span<const T> partials) {
  return reduce_sum(partials, RealOps<T>{});
}

namespace detail {

// Strided partition: element i feeds accumulator i % p_in, each accumulator
// summing in increasing i, then the accumulators go through the tree.
template <class Ops>
typename Ops::value_type dot_unchecked(const typename Ops::value_type* x,
                                       const typename Ops::value_type* w, std::size_t n,
                                       std::size_t p_in, const Ops& ops) {
  using V = typename Ops::value_type;
  V inline_acc[kMaxInlinePartials];
  V inline_tmp[kMaxInlinePartials];
  std::vector<V> heap_acc;
  std::vector<V> heap_tmp;
  V* acc = inline_acc;
  V* tmp = inline_tmp;
  if (p_in > kMaxInlinePartials) {
    heap_acc.resize(p_in);
    heap_tmp.resize(p_in);
    acc = heap_acc.data();
    tmp = heap_tmp.data();
  }
  for (std::size_t k = 0; k < p_in; ++k) acc[k] = V{};
  std::size_t i = 0;
  for (; i + p_in <= n; i += p_in) {
    for (std::size_t k = 0; k < p_in; ++k) acc[k] = ops.add(acc[k], ops.mul(x[i + k], w[i + k]));
  }
  for (std::size_t k = 0; i < n; ++i, ++k) acc[k] = ops.add(acc[k], ops.mul(x[i], w[i]));
  return tree_reduce<Ops>({acc, p_in}, {tmp, p_in}, ops);
}

}  // namespace detail

// Throws kLengthMismatch, kInvalidArgument (p_in == 0).
template <class Ops>
typename Ops::value_type dot_product(std::span<const typename Ops::value_type> x,
                                     std::span<const typename Ops::value_type> w,
                                     std::size_t p_in, const Ops& ops) {
  require_length(w.size(), x.size(), ErrorCode::kLengthMismatch, "dot_product");
  if (p_in == 0) fail(ErrorCode::kInvalidArgument, "num_parallel_in must be >= 1");
  return detail::dot_unchecked(x.data(), w.data(), x.size(), p_in, ops);
}

template <class T>
T dot_product(std::span<const T> x, std::span<const T> w, std::size_t p_in) {
  return dot_product(x, w, p_in, RealOps<T>{});
}

// Fixed-point weights prepared for the engine: raw values plus the largest
// row-wise sum of |raw|, which lets the SIMD kernels prove that no partial
// sum can saturate and skip the per-MAC clamps.
struct FxMatrix {
  Matrix<std::int64_t> raw;
  FxFormat format{};
  std::int64_t max_row_abs_sum = 0;

  static FxMatrix from_raw(Matrix<std::int64_t> raw, const FxFormat& fmt);
  static FxMatrix from_real(const Matrix<float>& m, const FxFormat& fmt);

  std::size_t rows() const noexcept { return raw.rows(); }
  std::size_t cols() const noexcept { return raw.cols(); }
};

enum class KernelBackend { kScalar, kAvx2 };

const char* backend_name(KernelBackend b);
bool backend_available(KernelBackend b);
KernelBackend active_backend();
// Throws kInvalidArgument if `b` is not available on this CPU/build.
void set_backend(KernelBackend b);

// RAII override of the active backend, for tests and benchmarks.
class ScopedBackend {
 public:
  explicit ScopedBackend(KernelBackend b) : previous_(active_backend()) { set_backend(b); }
  ~ScopedBackend() { set_backend(previous_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  KernelBackend previous_;
};

// Y = W x + b into `out`. Rows go in contiguous chunks of num_parallel_out;
// each row is a dot_product with num_parallel_in partials. The result does not
// depend on num_parallel_out or on the backend. Empty `bias` means no bias.
// Throws kShapeMismatch, kInvalidArgument.
void matvec_into(const Matrix<float>& w, std::span<const float> x, std::span<const float> bias,
                 const ParallelismParams& p, std::span<float> out);
void matvec_into(const FxMatrix& w, std::span<const std::int64_t> x,
                 std::span<const std::int64_t> bias, const ParallelismParams& p,
                 std::span<std::int64_t> out);

Vector<float> matvec(const Matrix<float>& w, std::span<const float> x, std::span<const float> bias,
                     const ParallelismParams& p);
Vector<std::int64_t> matvec(const FxMatrix& w, std::span<const std::int64_t> x,
                            std::span<const std::int64_t> bias, const ParallelismParams& p);

// Generic reference path for any policy (double, integer, fixed-point raw).
// Always scalar.
template <class Ops>
Vector<typename Ops::value_type> matvec(const Matrix<typename Ops::value_type>& w,
                                        std::span<const typename Ops::value_type> x,
                                        std::span<const typename Ops::value_type> bias,
                                        const ParallelismParams& p, const Ops& ops) {
  validate(p);
  require_length(x.size(), w.cols(), ErrorCode::kShapeMismatch, "matvec input");
  if (!bias.empty()) require_length(bias.size(), w.rows(), ErrorCode::kShapeMismatch, "matvec bias");
  Vector<typename Ops::value_type> out(w.rows());
  for (std::size_t r0 = 0; r0 < w.rows(); r0 += p.num_parallel_out) {
    const std::size_t r1 = std::min(w.rows(), r0 + p.num_parallel_out);
    for (std::size_t r = r0; r < r1; ++r) {
      auto v = detail::dot_unchecked(x.data(), w.row(r).data(), x.size(), p.num_parallel_in, ops);
      out[r] = bias.empty() ? v : ops.add(v, bias[r]);
    }
  }
  return out;
}

}  // namespace fastwave
