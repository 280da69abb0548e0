#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bine::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,
  kInput = 3,
  kDivergence = 4,
  kConfig = 5,
};

/// Runs one subcommand; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace bine::cli
