#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "bohmgrw/bohm/trajectories.hpp"
#include "bohmgrw/bohm/velocity.hpp"
#include "bohmgrw/grw/collapse.hpp"

namespace bohmgrw::grw {

struct GuidedGrwRun {
  GrwRun run;
  double X;
  /// (t, X) after every propagator step.
  std::vector<std::pair<double, double>> path;
};

/// One GRW realization with a Bohmian particle riding on it. The particle
/// moves with the velocity of the collapsed field; collapses do not move it.
inline GuidedGrwRun evolve_grw_guided(const ComplexField1D& psi0, const PotentialSpec& potential,
                                      const GrwParams& params, double T, GrwStreams rng, double X0,
                                      GrwOptions opts = {}) {
  const auto& grid = psi0.grid();
  bohm::detail::check_inside(grid, X0, 0, 0.0);
  GuidedGrwRun out{{psi0, {}, 0.0, 0}, X0, {{0.0, X0}}};

  // Collapses due at t = 0 happen before the first frame is taken.
  std::optional<bohm::VelocityFieldFrame> frame;
  auto user_collapse = opts.on_collapse;
  opts.on_collapse = [&](const ComplexField1D& psi, const CollapseEvent& e) {
    frame = bohm::velocity_field(psi, opts.units, e.time);
    if (user_collapse) user_collapse(psi, e);
  };
  auto user_propagated = opts.on_propagated;
  opts.on_propagated = [&](const ComplexField1D& psi, double t) {
    if (!frame) frame = bohm::velocity_field(psi0, opts.units, 0.0);
    auto next = bohm::velocity_field(psi, opts.units, t);
    frame->time = next.time - (t - out.path.back().first);
    out.X = bohm::rk4_step(out.X, *frame, next);
    bohm::detail::check_inside(grid, out.X, 0, t);
    out.path.emplace_back(t, out.X);
    frame = std::move(next);
    if (user_propagated) user_propagated(psi, t);
  };
  out.run = evolve_grw(psi0, potential, params, T, std::move(rng), opts);
  return out;
}

}  // namespace bohmgrw::grw
