#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "bohmgrw/com/collision.hpp"
#include "bohmgrw/csv.hpp"
#include "bohmgrw/grw/collapse.hpp"
#include "bohmgrw/parallel.hpp"
#include "bohmgrw/rng.hpp"

namespace bohmgrw::com {

struct AmplificationOptions {
  double T = 10.0;
  /// Bath packet width.
  double sigma = 1.0;
  /// Spacing of the rigid cluster and the spread of its relative coordinates.
  double spacing = 1.0;
  double relative_width = 0.1;
  /// Width of the initial centre-of-mass packet.
  double com_width = 5.0;
};

struct AmplificationRow {
  std::size_t N;
  double fitted_rate;
  double std_error;
  double mean_count;
  /// Per-run centre-of-mass localization counts.
  std::vector<std::uint64_t> counts;
};

struct AmplificationReport {
  std::vector<AmplificationRow> rows;
  double slope;
  double slope_stderr;
  double intercept;

  /// CSV N,fitted_rate,stderr.
  void write(std::ostream& out) const {
    csv::Writer w(out, {"N", "fitted_rate", "stderr"});
    for (const auto& r : rows) w.row({static_cast<long long>(r.N), r.fitted_rate, r.std_error});
  }
};

/// Number of centre-of-mass localization events in one run: bath packets
/// arrive at total rate N lambda, each hits a uniformly chosen particle of a
/// rigid Gaussian cluster, and an event is counted whenever the width of
/// psi_cm shrinks. Streams: bath_clock, bath_targets, bath_y0 at (seed, run),
/// so N = 1 sees the same arrival times as the single-particle simulators.
inline std::uint64_t count_com_localizations(std::size_t N, double lambda, std::uint64_t seed, std::uint64_t run,
                                             const AmplificationOptions& opts = {}) {
  std::vector<double> offsets(N);
  for (std::size_t k = 0; k < N; ++k)
    offsets[k] = opts.spacing * (static_cast<double>(k) - 0.5 * static_cast<double>(N - 1));
  auto psi = GaussianManyBody::rigid_cluster(0.0, opts.com_width, offsets, opts.relative_width);
  const ManyBodyConfig X{offsets};
  const auto R = X.R();

  grw::PoissonClock clock(static_cast<double>(N) * lambda, make_rng(seed, streams::bath_clock, run));
  auto targets = make_rng(seed, streams::bath_targets, run);
  auto y0 = make_rng(seed, streams::bath_y0, run);
  double width = com_gaussian(psi, R).width();
  std::uint64_t events = 0;
  while (clock.next_event() <= opts.T) {
    clock.pop();
    const std::size_t k = 1 + static_cast<std::size_t>(targets.below(N));
    const double Y0 = opts.sigma * y0.normal();
    detail::apply_collision(psi, k, Y0 + X.X[k - 1], 1.0, opts.sigma);
    const double w = com_gaussian(psi, R).width();
    if (w < width) ++events;
    width = w;
  }
  return events;
}

/// Centre-of-mass localization rate for each N, with a weighted straight-line
/// fit rate = slope N + intercept (through the origin if only one N is given).
inline AmplificationReport measure_amplification(const std::vector<std::size_t>& N_list, double lambda,
                                                 std::size_t runs, std::uint64_t seed,
                                                 const AmplificationOptions& opts = {}) {
  require(!N_list.empty(), Errc::invalid_argument, "need at least one particle count");
  require(runs >= 100, Errc::invalid_argument, "need at least 100 runs per particle count");
  require(lambda > 0.0 && std::isfinite(lambda), Errc::invalid_argument, "per-particle rate must be positive");
  require(opts.T > 0.0 && opts.sigma > 0.0, Errc::invalid_argument, "T and sigma must be positive");
  for (auto N : N_list) {
    require(N >= 1, Errc::invalid_argument, "particle counts must be >= 1");
    require(static_cast<double>(N) * lambda * opts.T * static_cast<double>(runs) <= 1e8, Errc::resource_limit,
            "more than 1e8 expected collisions");
  }

  AmplificationReport rep{{}, 0.0, 0.0, 0.0};
  for (auto N : N_list) {
    AmplificationRow row{N, 0.0, 0.0, 0.0, std::vector<std::uint64_t>(runs)};
    parallel_for(runs, [&](std::size_t r) { row.counts[r] = count_com_localizations(N, lambda, seed, r, opts); });
    double sum = 0.0;
    for (auto c : row.counts) sum += static_cast<double>(c);
    row.mean_count = sum / static_cast<double>(runs);
    double ss = 0.0;
    for (auto c : row.counts) ss += (static_cast<double>(c) - row.mean_count) * (static_cast<double>(c) - row.mean_count);
    const double sd = std::sqrt(ss / static_cast<double>(runs - 1));
    row.fitted_rate = row.mean_count / opts.T;
    // Identical counts in every run still carry Poisson uncertainty.
    const double spread = sd > 0.0 ? sd : std::sqrt(std::max(row.mean_count, 1.0));
    row.std_error = spread / (opts.T * std::sqrt(static_cast<double>(runs)));
    rep.rows.push_back(std::move(row));
  }

  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rep.rows) {
    const double w = 1.0 / (r.std_error * r.std_error);
    const double x = static_cast<double>(r.N);
    sw += w;
    sx += w * x;
    sy += w * r.fitted_rate;
    sxx += w * x * x;
    sxy += w * x * r.fitted_rate;
  }
  const double det = sw * sxx - sx * sx;
  if (det > 1e-12 * sw * sxx) {
    rep.slope = (sw * sxy - sx * sy) / det;
    rep.intercept = (sy - rep.slope * sx) / sw;
    rep.slope_stderr = std::sqrt(sw / det);
  } else {
    rep.slope = sxy / sxx;
    rep.slope_stderr = 1.0 / std::sqrt(sxx);
  }
  return rep;
}

}  // namespace bohmgrw::com
