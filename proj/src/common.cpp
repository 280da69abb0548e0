#include "bine/common.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <numbers>

#include "bine/matrix.hpp"
#include "bine/random.hpp"

namespace bine {

namespace {
std::atomic<bool> warnings_enabled{true};
}

double log_sigmoid(double x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void warn(std::string_view message) {
  if (warnings_enabled.load(std::memory_order_relaxed)) std::cerr << "warning: " << message << '\n';
}

void set_warnings_enabled(bool enabled) { warnings_enabled.store(enabled, std::memory_order_relaxed); }

double Rng::normal() {
  // 1 - uniform() lies in (0, 1], so the log is finite.
  const double r = std::sqrt(-2.0 * std::log(1.0 - uniform()));
  return r * std::cos(2.0 * std::numbers::pi * uniform());
}

bool Matrix::all_finite() const {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double scale, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += scale * x[i];
}

}  // namespace bine
