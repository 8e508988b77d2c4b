#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gas {

/// Bad user input: malformed config, missing field, out-of-range parameter.
/// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: non-finite value, factorization breakdown, budget
/// exceeded. The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double h) {
  const double two_pi = 2.0 * std::numbers::pi;
  double w = std::remainder(h, two_pi);
  if (w <= -std::numbers::pi) w += two_pi;
  return w;
}

/// Runs body(i) for i in [0, n). With threads <= 1 the loop is inline;
/// otherwise contiguous chunks go to worker threads. Callers own determinism:
/// bodies must write only to slot i so the result is independent of schedule.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace gas
