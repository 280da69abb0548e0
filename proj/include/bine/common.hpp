#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bine {

using VertexId = std::uint32_t;

/// The two vertex sets of a bipartite network.
enum class Side { U, V };

constexpr Side other(Side side) { return side == Side::U ? Side::V : Side::U; }

constexpr std::string_view to_string(Side side) { return side == Side::U ? "U" : "V"; }

/// Malformed or unreadable input data.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or argument violates a documented precondition.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Training or factorization produced a non-finite value.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerically stable log(sigmoid(x)).
double log_sigmoid(double x);

double sigmoid(double x);

// Warnings go to stderr unless silenced; tests silence them.
void warn(std::string_view message);
void set_warnings_enabled(bool enabled);

}  // namespace bine
