#include "fastwave/arithmetic.hpp"

#include "fastwave/error.hpp"

namespace fastwave {

NumberMode parse_number_mode(std::string_view text) {
  if (text == "real") return NumberMode::real();
  if (text.starts_with("fixed")) return NumberMode::fixed_point(parse_format(text));
  fail(ErrorCode::kInvalidFormat, "number mode must be 'real' or 'fixed<T,I>', got '" +
                                      std::string(text) + "'");
}

std::string number_mode_name(const NumberMode& mode) {
  return mode.fixed ? format_name(mode.format) : "real";
}

}  // namespace fastwave
