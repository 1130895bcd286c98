// AVX2 variants of the row-wise dot-product kernels. Built with -mavx2 and
// only reached after a runtime CPU check. Each lane is one of the strided
// partial accumulators of the scalar reference, so results match it exactly.

#include <immintrin.h>

#include "kernels/kernels.hpp"

namespace fastwave::kernels {
namespace {

template <class Ops>
typename Ops::value_type finish_row(typename Ops::value_type* lanes, std::size_t p_in,
                                    const typename Ops::value_type* x,
                                    const typename Ops::value_type* w, std::size_t full,
                                    std::size_t cols, const Ops& ops) {
  for (std::size_t i = full, k = 0; i < cols; ++i, ++k) lanes[k] = ops.add(lanes[k], ops.mul(x[i], w[i]));
  typename Ops::value_type tmp[detail::kMaxInlinePartials];
  return detail::tree_reduce<Ops>({lanes, p_in}, {tmp, p_in}, ops);
}

// ---------------------------------------------------------------- float32

// p_in = 8 * G: each row owns G registers, lane j of register g is
// accumulator 8g + j. R rows share each load of x.
template <std::size_t G, std::size_t R>
void f32_rows_x8(const float* w, std::size_t cols, const float* x, float* out) {
  constexpr std::size_t p_in = 8 * G;
  const RealOps<float> ops;
  const std::size_t full = cols / p_in * p_in;
  __m256 acc[R][G];
  for (auto& row : acc)
    for (auto& a : row) a = _mm256_setzero_ps();
  for (std::size_t i = 0; i < full; i += p_in) {
    for (std::size_t g = 0; g < G; ++g) {
      const __m256 xv = _mm256_loadu_ps(x + i + 8 * g);
      for (std::size_t r = 0; r < R; ++r) {
        const __m256 wv = _mm256_loadu_ps(w + r * cols + i + 8 * g);
        acc[r][g] = _mm256_add_ps(acc[r][g], _mm256_mul_ps(xv, wv));
      }
    }
  }
  for (std::size_t r = 0; r < R; ++r) {
    alignas(32) float lanes[p_in];
    for (std::size_t g = 0; g < G; ++g) _mm256_store_ps(lanes + 8 * g, acc[r][g]);
    out[r] = finish_row(lanes, p_in, x, w + r * cols, full, cols, ops);
  }
}

template <std::size_t G>
void f32_matvec_x8(const float* w, std::size_t rows, std::size_t cols, const float* x, float* out) {
  std::size_t r = 0;
  for (; r + 4 <= rows; r += 4) f32_rows_x8<G, 4>(w + r * cols, cols, x, out + r);
  for (; r < rows; ++r) f32_rows_x8<G, 1>(w + r * cols, cols, x, out + r);
}

inline __m256 load_row_pair(const float* lo, const float* hi) {
  return _mm256_insertf128_ps(_mm256_castps128_ps256(_mm_loadu_ps(lo)), _mm_loadu_ps(hi), 1);
}

// p_in = 4: one 256-bit register holds the four accumulators of two rows.
void f32_matvec_x4(const float* w, std::size_t rows, std::size_t cols, const float* x, float* out) {
  const RealOps<float> ops;
  const std::size_t full = cols / 4 * 4;
  std::size_t r = 0;
  for (; r + 4 <= rows; r += 4) {
    const float* w0 = w + r * cols;
    __m256 acc01 = _mm256_setzero_ps();
    __m256 acc23 = _mm256_setzero_ps();
    for (std::size_t i = 0; i < full; i += 4) {
      const __m256 xv = _mm256_broadcast_ps(reinterpret_cast<const __m128*>(x + i));
      acc01 = _mm256_add_ps(acc01, _mm256_mul_ps(xv, load_row_pair(w0 + i, w0 + cols + i)));
      acc23 = _mm256_add_ps(acc23, _mm256_mul_ps(xv, load_row_pair(w0 + 2 * cols + i, w0 + 3 * cols + i)));
    }
    alignas(32) float lanes[16];
    _mm256_store_ps(lanes, acc01);
    _mm256_store_ps(lanes + 8, acc23);
    for (std::size_t k = 0; k < 4; ++k) {
      out[r + k] = finish_row(lanes + 4 * k, 4, x, w0 + k * cols, full, cols, ops);
    }
  }
  for (; r < rows; ++r) {
    const float* wr = w + r * cols;
    __m128 acc = _mm_setzero_ps();
    for (std::size_t i = 0; i < full; i += 4) {
      acc = _mm_add_ps(acc, _mm_mul_ps(_mm_loadu_ps(x + i), _mm_loadu_ps(wr + i)));
    }
    alignas(16) float lanes[4];
    _mm_store_ps(lanes, acc);
    out[r] = finish_row(lanes, 4, x, wr, full, cols, ops);
  }
}

// ---------------------------------------------------------------- fixed point

// Fast path preconditions: raws fit in 31 bits so _mm256_mul_epi32 on the
// low halves gives exact 62-bit products, and the caller has proven that no
// product or partial sum can reach the saturation bounds, so the clamps of
// the scalar reference are no-ops and can be dropped.
//
// Rounding matches fx::round_shift: (p + half - [p < 0]) >> f. AVX2 has no
// 64-bit arithmetic shift, so a bias of 2^61 (a multiple of 2^f) keeps the
// operand non-negative for the logical shift; the accumulated bias is
// removed once per lane at the end. Intermediate wraparound is harmless
// because the final value fits.
constexpr int kBiasLog2 = 61;

template <std::size_t G, std::size_t R>
void fx_rows_x4(const std::int64_t* w, std::size_t cols, const std::int64_t* x,
                const FxFormat& fmt, std::int64_t* out) {
  constexpr std::size_t p_in = 4 * G;
  const FixedOps ops{fmt};
  const int f = fmt.frac_bits();
  const std::size_t full = cols / p_in * p_in;
  const std::uint64_t bias = std::uint64_t{1} << kBiasLog2;
  const __m256i round_bias = _mm256_set1_epi64x(static_cast<long long>(bias + (std::uint64_t{1} << (f - 1))));
  const __m128i shift = _mm_cvtsi32_si128(f);
  const __m256i zero = _mm256_setzero_si256();

  __m256i acc[R][G];
  for (auto& row : acc)
    for (auto& a : row) a = _mm256_setzero_si256();
  for (std::size_t i = 0; i < full; i += p_in) {
    for (std::size_t g = 0; g < G; ++g) {
      const __m256i xv = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(x + i + 4 * g));
      for (std::size_t r = 0; r < R; ++r) {
        const __m256i wv = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(w + r * cols + i + 4 * g));
        const __m256i prod = _mm256_mul_epi32(xv, wv);
        const __m256i neg = _mm256_cmpgt_epi64(zero, prod);
        const __m256i t = _mm256_add_epi64(_mm256_add_epi64(prod, round_bias), neg);
        acc[r][g] = _mm256_add_epi64(acc[r][g], _mm256_srl_epi64(t, shift));
      }
    }
  }
  const std::uint64_t accumulated_bias = (full / p_in) * (bias >> f);
  for (std::size_t r = 0; r < R; ++r) {
    alignas(32) std::int64_t lanes[p_in];
    for (std::size_t g = 0; g < G; ++g) {
      _mm256_store_si256(reinterpret_cast<__m256i*>(lanes + 4 * g), acc[r][g]);
    }
    for (auto& v : lanes) v = static_cast<std::int64_t>(static_cast<std::uint64_t>(v) - accumulated_bias);
    out[r] = finish_row(lanes, p_in, x, w + r * cols, full, cols, ops);
  }
}

template <std::size_t G>
void fx_matvec_x4(const std::int64_t* w, std::size_t rows, std::size_t cols, const std::int64_t* x,
                  const FxFormat& fmt, std::int64_t* out) {
  std::size_t r = 0;
  for (; r + 2 <= rows; r += 2) fx_rows_x4<G, 2>(w + r * cols, cols, x, fmt, out + r);
  for (; r < rows; ++r) fx_rows_x4<G, 1>(w + r * cols, cols, x, fmt, out + r);
}

bool fx_fast_path_ok(std::size_t cols, const std::int64_t* x, const FxFormat& fmt,
                     std::int64_t max_row_abs_sum) {
  if (fmt.total_bits > 31 || fmt.frac_bits() < 1 || max_row_abs_sum < 0) return false;
  std::int64_t max_x = 0;
  for (std::size_t i = 0; i < cols; ++i) max_x = std::max(max_x, x[i] < 0 ? -x[i] : x[i]);
  if (max_x > (std::int64_t{1} << 30)) return false;
  // Every rounded product is at most |x||w| / 2^f + 1/2, so any partial sum
  // is bounded by max|x| * max_row_sum|w| / 2^f + cols.
  const __int128 scaled = (__int128{max_x} * max_row_abs_sum + ((__int128{1} << fmt.frac_bits()) - 1))
                          >> fmt.frac_bits();
  return scaled + static_cast<__int128>(cols) <= fmt.max_raw();
}

}  // namespace

void matvec_f32_avx2(const float* w, std::size_t rows, std::size_t cols, const float* x,
                     std::size_t p_in, float* out) {
  switch (p_in) {
    case 4: return f32_matvec_x4(w, rows, cols, x, out);
    case 8: return f32_matvec_x8<1>(w, rows, cols, x, out);
    case 16: return f32_matvec_x8<2>(w, rows, cols, x, out);
    case 32: return f32_matvec_x8<4>(w, rows, cols, x, out);
    case 64: return f32_matvec_x8<8>(w, rows, cols, x, out);
    default: return matvec_f32_scalar(w, rows, cols, x, p_in, out);
  }
}

void matvec_fx_avx2(const std::int64_t* w, std::size_t rows, std::size_t cols,
                    const std::int64_t* x, std::size_t p_in, const FxFormat& fmt,
                    std::int64_t max_row_abs_sum, std::int64_t* out) {
  if ((p_in == 4 || p_in == 8 || p_in == 16 || p_in == 32) &&
      fx_fast_path_ok(cols, x, fmt, max_row_abs_sum)) {
    switch (p_in) {
      case 4: return fx_matvec_x4<1>(w, rows, cols, x, fmt, out);
      case 8: return fx_matvec_x4<2>(w, rows, cols, x, fmt, out);
      case 16: return fx_matvec_x4<4>(w, rows, cols, x, fmt, out);
      case 32: return fx_matvec_x4<8>(w, rows, cols, x, fmt, out);
    }
  }
  matvec_fx_scalar(w, rows, cols, x, p_in, fmt, max_row_abs_sum, out);
}

}  // namespace fastwave::kernels
