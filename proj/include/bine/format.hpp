#pragma once

#include <charconv>
#include <string>

namespace bine {

/// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double x) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, result.ptr);
}

}  // namespace bine
