#include "fastwave/fixed_point.hpp"

#include <charconv>
#include <cmath>

#include "fastwave/error.hpp"

namespace fastwave {

double FxFormat::resolution() const noexcept { return std::ldexp(1.0, -frac_bits()); }

FxFormat make_format(int total_bits, int int_bits) {
  FxFormat fmt{total_bits, int_bits};
  if (!fmt.valid()) {
    fail(ErrorCode::kInvalidFormat, "fixed<" + std::to_string(total_bits) + "," +
                                        std::to_string(int_bits) +
                                        "> needs 2 <= T <= 63 and 1 <= I <= T");
  }
  return fmt;
}

FxFormat parse_format(std::string_view text) {
  const std::string original(text);
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  };
  auto bad = [&]() -> FxFormat {
    fail(ErrorCode::kInvalidFormat, "expected fixed<T,I>, got '" + original + "'");
  };
  text = trim(text);
  constexpr std::string_view prefix = "fixed<";
  if (!text.starts_with(prefix) || !text.ends_with('>')) return bad();
  text.remove_prefix(prefix.size());
  text.remove_suffix(1);
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) return bad();
  auto number = [&](std::string_view s, int& out) {
    s = trim(s);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
  };
  int total = 0;
  int integer = 0;
  if (!number(text.substr(0, comma), total) || !number(text.substr(comma + 1), integer)) return bad();
  return make_format(total, integer);
}

std::string format_name(const FxFormat& fmt) {
  return "fixed<" + std::to_string(fmt.total_bits) + "," + std::to_string(fmt.int_bits) + ">";
}

namespace fx {

std::int64_t from_real(double x, const FxFormat& fmt) noexcept {
  if (std::isnan(x)) return 0;
  const double scaled = std::ldexp(x, fmt.frac_bits());
  // Bounds are exact in double up to 2^53; beyond that the clamp still picks
  // the right side because the comparison is monotone.
  if (scaled >= static_cast<double>(fmt.max_raw())) return fmt.max_raw();
  if (scaled <= static_cast<double>(fmt.min_raw())) return fmt.min_raw();
  return static_cast<std::int64_t>(std::round(scaled));
}

double to_real(std::int64_t raw, const FxFormat& fmt) noexcept {
  return std::ldexp(static_cast<double>(raw), -fmt.frac_bits());
}

std::int64_t tanh_raw(std::int64_t raw, const FxFormat& fmt) noexcept {
  const long double x = std::ldexp(static_cast<long double>(raw), -fmt.frac_bits());
  return from_real(static_cast<double>(std::tanh(x)), fmt);
}

}  // namespace fx

namespace {

void require_same(const FxValue& a, const FxValue& b) {
  if (!(a.format == b.format)) {
    fail(ErrorCode::kFormatMismatch,
         format_name(a.format) + " vs " + format_name(b.format));
  }
}

}  // namespace

FxValue to_fixed(double x, const FxFormat& fmt) {
  if (!fmt.valid()) fail(ErrorCode::kInvalidFormat, format_name(fmt));
  return {fx::from_real(x, fmt), fmt};
}

double to_real(const FxValue& v) { return fx::to_real(v.raw, v.format); }

FxValue fx_add(const FxValue& a, const FxValue& b) {
  require_same(a, b);
  return {fx::add_raw(a.raw, b.raw, a.format), a.format};
}

FxValue fx_mul(const FxValue& a, const FxValue& b) {
  require_same(a, b);
  return {fx::mul_raw(a.raw, b.raw, a.format), a.format};
}

FxValue fx_tanh(const FxValue& v) { return {fx::tanh_raw(v.raw, v.format), v.format}; }

}  // namespace fastwave
