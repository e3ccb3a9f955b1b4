#pragma once

// Counter-based random streams.
//
// Every random quantity in the library is drawn from a Philox4x32-10 stream
// keyed by the 64-bit master seed. The 128-bit counter is split into a
// 64-bit stream id (high half) and a 64-bit block index (low half), so
// (seed, stream id) names an independent, reproducible sequence and
// realizations can be generated in any order.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace bohmgrw {

class Philox4x32 {
 public:
  using result_type = std::uint32_t;

  Philox4x32(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (lane_ == 4) {
      block_ = generate(block_index_++);
      lane_ = 0;
    }
    return block_[lane_++];
  }

  std::uint64_t seed() const {
    return static_cast<std::uint64_t>(key_[0]) | (static_cast<std::uint64_t>(key_[1]) << 32);
  }
  std::uint64_t stream() const { return stream_; }

  /// Raw block for a given counter; exposed for the known-answer test.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;

  std::array<std::uint32_t, 4> generate(std::uint64_t index) const {
    return block({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                  static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                 key_);
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int lane_ = 4;
};

/// Seeded stream with the handful of distributions the simulators need.
/// Distributions are implemented here (not via <random>) so draws are
/// identical across standard libraries.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(seed, stream) {}

  std::uint64_t seed() const { return engine_.seed(); }
  std::uint64_t stream() const { return engine_.stream(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = engine_() >> 5;  // 27 bits
    const std::uint64_t lo = engine_() >> 6;  // 26 bits
    return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
  }

  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Exponential gap by inverse CDF.
  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  /// Standard normal by Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  /// Poisson count via exponential gaps (fine for the small means used here).
  std::uint64_t poisson(double mean) {
    std::uint64_t k = 0;
    double t = exponential(1.0);
    while (t < mean) {
      ++k;
      t += exponential(1.0);
    }
    return k;
  }

 private:
  Philox4x32 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stream ids. The high 32 bits name the purpose; the low 32 bits carry the
/// realization (trajectory/run) index.
namespace streams {
inline constexpr std::uint64_t make(std::uint32_t purpose, std::uint64_t index) {
  return (static_cast<std::uint64_t>(purpose) << 32) ^ index;
}
inline constexpr std::uint32_t initial_positions = 1;
inline constexpr std::uint32_t grw_clock = 2;
inline constexpr std::uint32_t grw_centers = 3;
inline constexpr std::uint32_t bath_clock = 4;
inline constexpr std::uint32_t bath_y0 = 5;
inline constexpr std::uint32_t bath_centers = 6;
inline constexpr std::uint32_t bath_targets = 7;
inline constexpr std::uint32_t wiener = 8;
inline constexpr std::uint32_t readout = 9;
inline constexpr std::uint32_t misc = 10;
}  // namespace streams

inline Rng make_rng(std::uint64_t seed, std::uint32_t purpose, std::uint64_t index = 0) {
  return Rng(seed, streams::make(purpose, index));
}

}  // namespace bohmgrw
