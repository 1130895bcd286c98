#include "kernels/kernels.hpp"

namespace fastwave::kernels {

void matvec_f32_scalar(const float* w, std::size_t rows, std::size_t cols, const float* x,
                       std::size_t p_in, float* out) {
  const RealOps<float> ops;
  for (std::size_t r = 0; r < rows; ++r) out[r] = detail::dot_unchecked(x, w + r * cols, cols, p_in, ops);
}

void matvec_fx_scalar(const std::int64_t* w, std::size_t rows, std::size_t cols,
                      const std::int64_t* x, std::size_t p_in, const FxFormat& fmt,
                      std::int64_t /*max_row_abs_sum*/, std::int64_t* out) {
  const FixedOps ops{fmt};
  for (std::size_t r = 0; r < rows; ++r) out[r] = detail::dot_unchecked(x, w + r * cols, cols, p_in, ops);
}

}  // namespace fastwave::kernels
