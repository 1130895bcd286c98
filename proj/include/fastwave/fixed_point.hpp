#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace fastwave {

// Signed two's-complement Q format: `int_bits` includes the sign bit,
// frac_bits = total_bits - int_bits. Default is <27,8>, i.e. 19 fractional bits.
struct FxFormat {
  int total_bits = 27;
  int int_bits = 8;

  constexpr int frac_bits() const noexcept { return total_bits - int_bits; }
  constexpr std::int64_t max_raw() const noexcept {
    return (std::int64_t{1} << (total_bits - 1)) - 1;
  }
  constexpr std::int64_t min_raw() const noexcept { return -(std::int64_t{1} << (total_bits - 1)); }
  // Value of one LSB.
  double resolution() const noexcept;

  bool valid() const noexcept {
    return total_bits >= 2 && total_bits <= 63 && int_bits >= 1 && int_bits <= total_bits;
  }

  friend bool operator==(const FxFormat&, const FxFormat&) = default;
};

// Throws kInvalidFormat.
FxFormat make_format(int total_bits, int int_bits);

// Accepts "fixed<T,I>" (whitespace around numbers allowed).
FxFormat parse_format(std::string_view text);
std::string format_name(const FxFormat& fmt);

struct FxValue {
  std::int64_t raw = 0;
  FxFormat format{};

  friend bool operator==(const FxValue&, const FxValue&) = default;
};

FxValue to_fixed(double x, const FxFormat& fmt);
double to_real(const FxValue& v);

// Throw kFormatMismatch when formats differ.
FxValue fx_add(const FxValue& a, const FxValue& b);
FxValue fx_mul(const FxValue& a, const FxValue& b);
FxValue fx_tanh(const FxValue& v);

// Raw-integer layer used by the array kernels. Rounding is nearest with ties
// away from zero; every result saturates to [min_raw, max_raw].
namespace fx {

inline std::int64_t saturate(__int128 v, const FxFormat& fmt) noexcept {
  if (v > fmt.max_raw()) return fmt.max_raw();
  if (v < fmt.min_raw()) return fmt.min_raw();
  return static_cast<std::int64_t>(v);
}

// round(v / 2^shift), ties away from zero. For shift >= 1 this is
// (v + 2^(shift-1) - [v < 0]) >> shift with an arithmetic shift.
inline __int128 round_shift(__int128 v, int shift) noexcept {
  if (shift == 0) return v;
  const __int128 half = __int128{1} << (shift - 1);
  return (v + half - (v < 0 ? 1 : 0)) >> shift;
}

inline std::int64_t add_raw(std::int64_t a, std::int64_t b, const FxFormat& fmt) noexcept {
  return saturate(__int128{a} + b, fmt);
}

inline std::int64_t mul_raw(std::int64_t a, std::int64_t b, const FxFormat& fmt) noexcept {
  return saturate(round_shift(__int128{a} * b, fmt.frac_bits()), fmt);
}

std::int64_t from_real(double x, const FxFormat& fmt) noexcept;
double to_real(std::int64_t raw, const FxFormat& fmt) noexcept;
std::int64_t tanh_raw(std::int64_t raw, const FxFormat& fmt) noexcept;

}  // namespace fx
}  // namespace fastwave
