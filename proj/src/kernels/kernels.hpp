#pragma once

#include <cstddef>
#include <cstdint>

#include "fastwave/fixed_point.hpp"
#include "fastwave/matmul.hpp"

// Row-wise dot-product kernels behind the matrix-vector engine. Every
// variant must produce results bit-identical to the scalar reference: the
// same strided accumulator partition, the same per-lane order, the same tree.
namespace fastwave::kernels {

// out[r] = dot(w[r, :], x) for every row, no bias.
using MatvecF32Fn = void (*)(const float* w, std::size_t rows, std::size_t cols, const float* x,
                             std::size_t p_in, float* out);
using MatvecFxFn = void (*)(const std::int64_t* w, std::size_t rows, std::size_t cols,
                            const std::int64_t* x, std::size_t p_in, const FxFormat& fmt,
                            std::int64_t max_row_abs_sum, std::int64_t* out);

struct KernelTable {
  MatvecF32Fn matvec_f32;
  MatvecFxFn matvec_fx;
};

void matvec_f32_scalar(const float* w, std::size_t rows, std::size_t cols, const float* x,
                       std::size_t p_in, float* out);
void matvec_fx_scalar(const std::int64_t* w, std::size_t rows, std::size_t cols,
                      const std::int64_t* x, std::size_t p_in, const FxFormat& fmt,
                      std::int64_t max_row_abs_sum, std::int64_t* out);

#if defined(FASTWAVE_HAVE_AVX2)
void matvec_f32_avx2(const float* w, std::size_t rows, std::size_t cols, const float* x,
                     std::size_t p_in, float* out);
void matvec_fx_avx2(const std::int64_t* w, std::size_t rows, std::size_t cols,
                    const std::int64_t* x, std::size_t p_in, const FxFormat& fmt,
                    std::int64_t max_row_abs_sum, std::int64_t* out);
#endif

const KernelTable& active_table();

}  // namespace fastwave::kernels
