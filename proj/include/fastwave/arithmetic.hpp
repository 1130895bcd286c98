#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "fastwave/fixed_point.hpp"
#include "fastwave/matmul.hpp"

namespace fastwave {

// Runtime selection between 32-bit real arithmetic and a fixed-point format.
struct NumberMode {
  bool fixed = false;
  FxFormat format{};

  static NumberMode real() { return {}; }
  static NumberMode fixed_point(const FxFormat& fmt) { return {true, fmt}; }

  friend bool operator==(const NumberMode&, const NumberMode&) = default;
};

// "real" or "fixed<T,I>". Throws kInvalidFormat.
NumberMode parse_number_mode(std::string_view text);
std::string number_mode_name(const NumberMode& mode);

// Compile-time arithmetic back ends for the layer and generation code. In
// fixed mode weights, queues, activations and logits all share one format.
// `matvec_calls`, when set, counts every engine invocation.
struct RealArithmetic {
  using value_type = float;
  using matrix_type = Matrix<float>;

  std::uint64_t* matvec_calls = nullptr;

  matrix_type prepare(const Matrix<float>& m) const { return m; }
  value_type from_real(double x) const noexcept { return static_cast<float>(x); }
  double to_real(value_type v) const noexcept { return v; }
  value_type add(value_type a, value_type b) const noexcept { return a + b; }
  value_type tanh(value_type v) const noexcept { return std::tanh(v); }

  void matvec(const matrix_type& w, std::span<const value_type> x,
              std::span<const value_type> bias, const ParallelismParams& p,
              std::span<value_type> out) const {
    if (matvec_calls) ++*matvec_calls;
    matvec_into(w, x, bias, p, out);
  }
};

struct FixedArithmetic {
  using value_type = std::int64_t;
  using matrix_type = FxMatrix;

  FxFormat format{};
  std::uint64_t* matvec_calls = nullptr;

  matrix_type prepare(const Matrix<float>& m) const { return FxMatrix::from_real(m, format); }
  value_type from_real(double x) const noexcept { return fx::from_real(x, format); }
  double to_real(value_type v) const noexcept { return fx::to_real(v, format); }
  value_type add(value_type a, value_type b) const noexcept { return fx::add_raw(a, b, format); }
  value_type tanh(value_type v) const noexcept { return fx::tanh_raw(v, format); }

  void matvec(const matrix_type& w, std::span<const value_type> x,
              std::span<const value_type> bias, const ParallelismParams& p,
              std::span<value_type> out) const {
    if (matvec_calls) ++*matvec_calls;
    matvec_into(w, x, bias, p, out);
  }
};

}  // namespace fastwave
