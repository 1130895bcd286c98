#include "fastwave/matmul.hpp"

#include <bit>
#include <cstdlib>

#include "kernels/kernels.hpp"

namespace fastwave {
namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

template <class W, class T>
void check_shapes(const W& w, std::span<const T> x, std::span<const T> bias, std::span<T> out) {
  require_length(x.size(), w.cols(), ErrorCode::kShapeMismatch, "matvec input");
  require_length(out.size(), w.rows(), ErrorCode::kShapeMismatch, "matvec output");
  if (!bias.empty()) require_length(bias.size(), w.rows(), ErrorCode::kShapeMismatch, "matvec bias");
}

}  // namespace

void validate(const ParallelismParams& p) {
  if (p.num_parallel_out == 0 || p.num_parallel_in == 0) {
    fail(ErrorCode::kInvalidArgument, "parallelism parameters must be >= 1");
  }
  if (!std::has_single_bit(p.num_parallel_in)) {
    fail(ErrorCode::kInvalidArgument,
         "num_parallel_in must be a power of two, got " + std::to_string(p.num_parallel_in));
  }
}

CostEstimate estimate_cycles(std::size_t rows, std::size_t cols, const ParallelismParams& p) {
  validate(p);
  if (rows == 0 || cols == 0) fail(ErrorCode::kInvalidArgument, "estimate_cycles needs M, N >= 1");
  CostEstimate c;
  c.mac_count = std::uint64_t{rows} * cols;
  const std::uint64_t tree_depth = std::countr_zero(p.num_parallel_in);
  c.estimated_cycles =
      ceil_div(rows, p.num_parallel_out) * (ceil_div(cols, p.num_parallel_in) + tree_depth + 1);
  c.weight_buffer_elems = std::uint64_t{p.num_parallel_out} * cols;
  return c;
}

FxMatrix FxMatrix::from_raw(Matrix<std::int64_t> raw, const FxFormat& fmt) {
  if (!fmt.valid()) fail(ErrorCode::kInvalidFormat, format_name(fmt));
  FxMatrix m;
  m.format = fmt;
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    __int128 sum = 0;
    for (std::int64_t v : raw.row(r)) {
      if (v > fmt.max_raw() || v < fmt.min_raw()) {
        fail(ErrorCode::kInvalidArgument, "raw value outside " + format_name(fmt));
      }
      sum += v < 0 ? -__int128{v} : __int128{v};
    }
    const __int128 cap = INT64_MAX;
    m.max_row_abs_sum = std::max<std::int64_t>(m.max_row_abs_sum,
                                               static_cast<std::int64_t>(std::min(sum, cap)));
  }
  m.raw = std::move(raw);
  return m;
}

FxMatrix FxMatrix::from_real(const Matrix<float>& m, const FxFormat& fmt) {
  if (!fmt.valid()) fail(ErrorCode::kInvalidFormat, format_name(fmt));
  return from_raw(map_matrix(m, [&](float v) { return fx::from_real(v, fmt); }), fmt);
}

void matvec_into(const Matrix<float>& w, std::span<const float> x, std::span<const float> bias,
                 const ParallelismParams& p, std::span<float> out) {
  validate(p);
  check_shapes(w, x, bias, out);
  // Rows are independent, so chunking by num_parallel_out only changes the
  // schedule; the kernel walks rows in order.
  kernels::active_table().matvec_f32(w.data(), w.rows(), w.cols(), x.data(), p.num_parallel_in,
                                     out.data());
  if (!bias.empty()) {
    for (std::size_t r = 0; r < out.size(); ++r) out[r] += bias[r];
  }
}

void matvec_into(const FxMatrix& w, std::span<const std::int64_t> x,
                 std::span<const std::int64_t> bias, const ParallelismParams& p,
                 std::span<std::int64_t> out) {
  validate(p);
  check_shapes(w, x, bias, out);
  kernels::active_table().matvec_fx(w.raw.data(), w.rows(), w.cols(), x.data(), p.num_parallel_in,
                                    w.format, w.max_row_abs_sum, out.data());
  if (!bias.empty()) {
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = fx::add_raw(out[r], bias[r], w.format);
  }
}

Vector<float> matvec(const Matrix<float>& w, std::span<const float> x, std::span<const float> bias,
                     const ParallelismParams& p) {
  Vector<float> out(w.rows());
  matvec_into(w, x, bias, p, out);
  return out;
}

Vector<std::int64_t> matvec(const FxMatrix& w, std::span<const std::int64_t> x,
                            std::span<const std::int64_t> bias, const ParallelismParams& p) {
  Vector<std::int64_t> out(w.rows());
  matvec_into(w, x, bias, p, out);
  return out;
}

}  // namespace fastwave
