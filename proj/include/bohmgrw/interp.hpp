#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace bohmgrw::interp {

/// Four-point Lagrange weights for nodes at -1, 0, 1, 2 evaluated at t in [0, 1).
inline std::array<double, 4> cubic_weights(double t) {
  return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
          -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

/// Cubic interpolation of uniformly spaced samples at fractional index s.
/// `at(i)` supplies sample i for any integer i (the caller decides whether
/// out-of-range indices wrap or read as zero).
template <class Sample>
auto cubic(double s, Sample&& at) {
  const double fl = std::floor(s);
  const long i0 = static_cast<long>(fl);
  const auto w = cubic_weights(s - fl);
  return w[0] * at(i0 - 1) + w[1] * at(i0) + w[2] * at(i0 + 1) + w[3] * at(i0 + 2);
}

inline std::size_t wrap(long i, std::size_t n) {
  const long m = static_cast<long>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

}  // namespace bohmgrw::interp
