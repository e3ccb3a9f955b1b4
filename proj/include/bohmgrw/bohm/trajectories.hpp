#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "bohmgrw/bohm/velocity.hpp"
#include "bohmgrw/csv.hpp"
#include "bohmgrw/propagate.hpp"
#include "bohmgrw/rng.hpp"
#include "bohmgrw/sampling.hpp"

namespace bohmgrw::bohm {

/// Positions of independent Bohmian particles guided by the same field.
struct TrajectoryEnsemble {
  std::vector<double> positions;
  double time = 0.0;
  /// Master seed the per-trajectory streams were derived from.
  std::uint64_t seed = 0;

  std::size_t size() const { return positions.size(); }
};

/// Quantum-equilibrium initial ensemble: trajectory j draws its start from
/// |psi|^2 using its own stream (seed, initial_positions, j).
inline TrajectoryEnsemble equilibrium_ensemble(const ComplexField1D& psi, std::size_t n,
                                               std::uint64_t seed, double t0 = 0.0) {
  const DiscreteCdf cdf(probability_density(psi));
  TrajectoryEnsemble ens{std::vector<double>(n), t0, seed};
  for (std::size_t j = 0; j < n; ++j) {
    auto rng = make_rng(seed, streams::initial_positions, j);
    ens.positions[j] = cdf.quantile(rng.uniform());
  }
  return ens;
}

namespace detail {

inline void check_inside(const Grid1D& g, double x, std::size_t id, double t) {
  const double lo = g.x_min() + 2.0 * g.dx(), hi = g.x_max() - 2.0 * g.dx();
  if (!(x >= lo && x <= hi))
    throw Error(Errc::domain_escape, "trajectory " + std::to_string(id) + " left the grid interior at t=" +
                                         std::to_string(t) + " (x=" + std::to_string(x) + ")");
}

}  // namespace detail

namespace detail {

/// Substeps needed near x so that each moves at most half a cell and
/// |dv/dx| h stays below 1/4; capped at 4096.
inline long rk4_substeps(double x, const VelocityFieldFrame& a, const VelocityFieldFrame& b, double h) {
  const auto n = static_cast<long>(a.v.size());
  const double dx = a.grid.dx();
  const auto i0 = static_cast<long>(std::floor((x - a.grid.x_min()) / dx));
  double speed = 0.0, grad = 0.0;
  for (const auto* f : {&a, &b})
    for (long i = i0 - 1; i <= i0 + 2; ++i) {
      const double v = f->v[interp::wrap(i, static_cast<std::size_t>(n))];
      const double w = f->v[interp::wrap(i + 1, static_cast<std::size_t>(n))];
      speed = std::max(speed, std::abs(v));
      grad = std::max(grad, std::abs(w - v) / dx);
    }
  const double need = std::max(std::abs(h) * speed / (0.5 * dx), std::abs(h) * grad / 0.25);
  if (!(need > 1.0)) return 1;
  return std::min(4096L, static_cast<long>(std::ceil(need)));
}

}  // namespace detail

/// One RK4 step from frame a to frame b; the velocity is linear in time
/// between the two frames. Where the field is steep (near nodes) the step is
/// split into equal substeps so neighbouring trajectories cannot jump past
/// each other.
inline double rk4_step(double x, const VelocityFieldFrame& a, const VelocityFieldFrame& b) {
  const double h = b.time - a.time;
  const long m = detail::rk4_substeps(x, a, b, h);
  if (m == 1) {
    auto v_mid = [&](double y) { return 0.5 * (a.at(y) + b.at(y)); };
    const double k1 = a.at(x);
    const double k2 = v_mid(x + 0.5 * h * k1);
    const double k3 = v_mid(x + 0.5 * h * k2);
    const double k4 = b.at(x + h * k3);
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const double hs = h / static_cast<double>(m);
  auto v = [&](double y, double tau) {
    const double va = a.at(y);
    return va + tau * (b.at(y) - va);
  };
  for (long k = 0; k < m; ++k) {
    const double t0 = static_cast<double>(k) / static_cast<double>(m);
    const double t1 = static_cast<double>(k + 1) / static_cast<double>(m);
    const double tm = 0.5 * (t0 + t1);
    const double k1 = v(x, t0);
    const double k2 = v(x + 0.5 * hs * k1, tm);
    const double k3 = v(x + 0.5 * hs * k2, tm);
    const double k4 = v(x + hs * k3, t1);
    x += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

inline void advance(TrajectoryEnsemble& ens, const VelocityFieldFrame& a, const VelocityFieldFrame& b) {
  for (std::size_t j = 0; j < ens.size(); ++j) {
    ens.positions[j] = rk4_step(ens.positions[j], a, b);
    detail::check_inside(a.grid, ens.positions[j], j, b.time);
  }
  ens.time = b.time;
}

/// Transports the ensemble through a time-ordered frame sequence.
inline TrajectoryEnsemble advance_ensemble(TrajectoryEnsemble ens, std::span<const VelocityFieldFrame> frames) {
  require(!frames.empty(), Errc::invalid_argument, "no velocity frames");
  for (std::size_t j = 0; j < ens.size(); ++j) detail::check_inside(frames[0].grid, ens.positions[j], j, ens.time);
  for (std::size_t f = 0; f + 1 < frames.size(); ++f) advance(ens, frames[f], frames[f + 1]);
  return ens;
}

/// Sort permutation with ties (within `tie`) broken by index.
inline std::vector<std::size_t> ordering(const std::vector<double>& xs, double tie = 1e-13) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b] - tie; });
  return idx;
}

/// True when no two trajectories exchanged order between the snapshots.
/// Positions closer than `tie` are treated as one point.
inline bool order_preserved(const std::vector<double>& before, const std::vector<double>& after, double tie = 1e-13) {
  const auto perm = ordering(before, tie);
  for (std::size_t i = 0; i + 1 < perm.size(); ++i) {
    const double gap_before = before[perm[i + 1]] - before[perm[i]];
    if (gap_before <= tie) continue;
    if (after[perm[i + 1]] - after[perm[i]] < -tie) return false;
  }
  return true;
}

/// Propagates psi with the split-step scheme and carries the ensemble along,
/// taking a velocity frame at every propagator step. `on_step` (optional)
/// sees the state after each step.
struct GuidedEvolution {
  ComplexField1D psi;
  TrajectoryEnsemble ensemble;
};

using StepObserver = std::function<void(const ComplexField1D&, const TrajectoryEnsemble&)>;

inline GuidedEvolution evolve_guided(ComplexField1D psi, TrajectoryEnsemble ens, const PotentialSpec& potential,
                                     const UnitsContext& units, double dt, long steps,
                                     const PropagateOptions& opts = {}, const StepObserver& on_step = {}) {
  check_resolved(psi, opts);
  const SplitStepPropagator prop(psi.grid(), potential, units, dt);
  auto frame = velocity_field(psi, units, ens.time);
  for (long s = 0; s < steps; ++s) {
    prop.step(psi);
    check_boundary(psi, opts, "guided evolution step " + std::to_string(s + 1));
    auto next = velocity_field(psi, units, frame.time + dt);
    advance(ens, frame, next);
    frame = std::move(next);
    if (on_step) on_step(psi, ens);
  }
  return {std::move(psi), std::move(ens)};
}

/// Trajectory file: t,trajectory_id,x.
class TrajectoryCsv {
 public:
  explicit TrajectoryCsv(std::ostream& out) : w_(out, {"t", "trajectory_id", "x"}) {}
  void record(const TrajectoryEnsemble& ens) {
    for (std::size_t j = 0; j < ens.size(); ++j)
      w_.row({ens.time, static_cast<long long>(j), ens.positions[j]});
  }

 private:
  csv::Writer w_;
};

}  // namespace bohmgrw::bohm
