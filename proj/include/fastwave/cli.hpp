#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "fastwave/model.hpp"

namespace fastwave {

// Entry point of the `fastwave` tool. `args` excludes the program name.
// Returns 0 on success, 1 on a runtime failure (diagnostic on `err`), and 2
// with usage text for malformed arguments.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

// Configuration used by `verify`: at most 2 blocks, 5 layers per block and
// 8 channels, everything else taken from `cfg`.
ModelConfig reduced_config(const ModelConfig& cfg);

}  // namespace fastwave
