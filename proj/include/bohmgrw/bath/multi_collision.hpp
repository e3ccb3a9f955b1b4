#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bohmgrw/bath/collision.hpp"
#include "bohmgrw/bohm/trajectories.hpp"
#include "bohmgrw/bohm/velocity.hpp"
#include "bohmgrw/csv.hpp"
#include "bohmgrw/grw/collapse.hpp"
#include "bohmgrw/sampling.hpp"

namespace bohmgrw::bath {

/// Fixed-width bins over [lo, hi); samples outside are tallied separately.
struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;
  std::size_t underflow = 0;
  std::size_t overflow = 0;

  Histogram(double lo_, double hi_, std::size_t bins) : lo(lo_), hi(hi_), counts(bins, 0) {
    require(hi > lo && bins > 0, Errc::invalid_argument, "histogram needs hi > lo and at least one bin");
  }

  double width() const { return (hi - lo) / static_cast<double>(counts.size()); }

  void add(double x) {
    if (x < lo) {
      ++underflow;
    } else if (x >= hi) {
      ++overflow;
    } else {
      const auto b = std::min(counts.size() - 1, static_cast<std::size_t>((x - lo) / width()));
      ++counts[b];
    }
  }

  /// CSV bin_center,count,density.
  void write(std::ostream& out) const {
    std::size_t total = underflow + overflow;
    for (auto c : counts) total += c;
    csv::Writer w(out, {"bin_center", "count", "density"});
    for (std::size_t b = 0; b < counts.size(); ++b)
      w.row({lo + (static_cast<double>(b) + 0.5) * width(), static_cast<long long>(counts[b]),
             static_cast<double>(counts[b]) / (static_cast<double>(total) * width())});
  }
};

struct ZStatistics {
  std::vector<double> z;
  KsReport ks;
  Histogram histogram;
};

/// Localization centres Z = X^0 + Y^0 with X^0 ~ |psi_S|^2 and Y^0 drawn
/// from the bath packet, compared by KS (99%) with the GRW collapse-centre
/// law at r_C = sqrt(2) sigma computed on the system grid.
inline ZStatistics localization_center_statistics(const ComplexField1D& psi_S, double sigma, std::size_t n,
                                                  std::uint64_t seed, std::size_t bins = 128) {
  require(n >= 1000, Errc::invalid_argument, "need at least 1000 samples");
  require(sigma > 0.0, Errc::invalid_argument, "bath packet width must be positive");
  const DiscreteCdf system(probability_density(psi_S));
  auto rx = make_rng(seed, streams::initial_positions);
  auto ry = make_rng(seed, streams::bath_y0);
  const auto& g = psi_S.grid();
  ZStatistics out{std::vector<double>(n), {}, Histogram(g.x_min(), g.x_max(), bins)};
  for (std::size_t s = 0; s < n; ++s) {
    const double X0 = system.quantile(rx.uniform());
    const double Y0 = sigma * ry.normal();
    out.z[s] = X0 + Y0;
    out.histogram.add(out.z[s]);
  }
  const DiscreteCdf grw(grw::collapse_center_pdf(psi_S, std::sqrt(2.0) * sigma));
  out.ks = {ks_statistic(out.z, std::ref(grw)), ks_critical(n), n};
  return out;
}

struct CollisionRecord {
  double time;
  /// Particle hit, 1-based; always 1 for a single system particle.
  std::uint64_t k;
  /// Bath draw relative to its packet centre a_j.
  double Y0;
  /// Localization centre X(t_j) + Y0.
  double Z;
};

/// Collision log: t,k,Y0,Z.
inline void write_collision_log(std::ostream& out, const std::vector<CollisionRecord>& records) {
  csv::Writer w(out, {"t", "k", "Y0", "Z"});
  for (const auto& r : records) w.row({r.time, static_cast<long long>(r.k), r.Y0, r.Z});
}

struct MultiCollisionOptions {
  UnitsContext units = UnitsContext::natural();
  double max_dt = 1e-2;
  PropagateOptions propagate{};
  /// Start of the Bohmian trajectory; drawn from |psi_S0|^2 when empty.
  std::optional<double> start{};
  /// Packet centres a_j uniform in [-spread, spread] sigma; 0 uses bath.a for every packet.
  double center_spread = 0.0;
  bool record_path = true;
  /// Keep a copy of the conditional field every this many steps (0: none).
  long timeline_every = 0;
};

struct ConditionalSnapshot {
  double time;
  ComplexField1D field;
};

struct MultiCollisionRun {
  ComplexField1D psi;
  double X;
  std::vector<CollisionRecord> collisions;
  std::vector<std::pair<double, double>> path;
  std::vector<ConditionalSnapshot> timeline;
  double dt;
  long steps;
};

/// Bohmian particle guided by its conditional wave function while bath
/// packets hit it at Poisson times (instantaneous coupling). Between hits
/// psi_C evolves by the split-step scheme; a hit multiplies it by
/// exp(-(X + Y0 - x)^2 / 4 sigma^2) and renormalizes. Streams per run:
/// bath_clock, bath_y0, bath_centers and initial_positions, all (seed, run).
inline MultiCollisionRun multi_collision_run(const ComplexField1D& psi_S0, const PotentialSpec& potential,
                                             const BathParticleSpec& bath, double T, std::uint64_t seed,
                                             std::uint64_t run, const MultiCollisionOptions& opts = {}) {
  bath.validate();
  require(psi_S0.all_finite(), Errc::numeric_overflow, "non-finite amplitude in initial field");
  require(bath.rate * T <= 1e6, Errc::resource_limit, "more than 1e6 expected collisions");
  const auto [steps, dt] = grw::grw_stepping(T, bath.rate, opts.max_dt);
  check_resolved(psi_S0, opts.propagate);
  const auto& grid = psi_S0.grid();

  MultiCollisionRun out{psi_S0, 0.0, {}, {}, {}, dt, steps};
  if (opts.start) {
    out.X = *opts.start;
  } else {
    auto r = make_rng(seed, streams::initial_positions, run);
    out.X = DiscreteCdf(probability_density(psi_S0)).quantile(r.uniform());
  }
  bohm::detail::check_inside(grid, out.X, run, 0.0);

  grw::PoissonClock clock(bath.rate, make_rng(seed, streams::bath_clock, run));
  auto y0_rng = make_rng(seed, streams::bath_y0, run);
  auto center_rng = make_rng(seed, streams::bath_centers, run);
  const SplitStepPropagator prop(grid, potential, opts.units, dt);

  auto collide_due = [&](long s) {
    bool any = false;
    while (clock.next_event() <= T && std::lround(clock.next_event() / dt) == s) {
      const double t = clock.pop();
      const double Y0 = bath.sigma * y0_rng.normal();
      const double a = opts.center_spread > 0.0
                           ? bath.a + center_rng.uniform(-opts.center_spread, opts.center_spread) * bath.sigma
                           : bath.a;
      const double Yt = a + Y0 + out.X;  // g = 1 once the instantaneous window has closed
      for (std::size_t i = 0; i < out.psi.size(); ++i)
        out.psi[i] *= collision_multiplier(grid.x(i), Yt, 1.0, bath.sigma, a);
      const double norm = out.psi.norm();
      if (!(norm >= 1e-14))
        throw Error(Errc::collapse_to_null, "collision at t=" + std::to_string(t) + " left norm " + std::to_string(norm));
      out.psi.normalize();
      out.collisions.push_back({t, 1, Y0, out.X + Y0});
      any = true;
    }
    return any;
  };

  auto snapshot = [&](long s) {
    if (opts.record_path) out.path.emplace_back(static_cast<double>(s) * dt, out.X);
    if (opts.timeline_every > 0 && s % opts.timeline_every == 0)
      out.timeline.push_back({static_cast<double>(s) * dt, out.psi});
  };

  collide_due(0);
  snapshot(0);
  auto frame = bohm::velocity_field(out.psi, opts.units, 0.0);
  for (long s = 1; s <= steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    prop.step(out.psi);
    check_boundary(out.psi, opts.propagate, "multi-collision step " + std::to_string(s));
    auto next = bohm::velocity_field(out.psi, opts.units, t);
    out.X = bohm::rk4_step(out.X, frame, next);
    bohm::detail::check_inside(grid, out.X, run, t);
    if (collide_due(s)) next = bohm::velocity_field(out.psi, opts.units, t);
    frame = std::move(next);
    snapshot(s);
  }
  require(out.psi.all_finite(), Errc::numeric_overflow, "non-finite amplitude after multi-collision run");
  return out;
}

}  // namespace bohmgrw::bath
