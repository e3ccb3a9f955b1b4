#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "bohmgrw/bohm/trajectories.hpp"
#include "bohmgrw/bohm/velocity.hpp"
#include "bohmgrw/classical/qmupl.hpp"
#include "bohmgrw/csv.hpp"
#include "bohmgrw/rng.hpp"

namespace bohmgrw::classical {

/// Worst relative change of the force across [x_bar - Delta q, x_bar + Delta q],
/// measured against the largest force met along the path.
struct LinearizationCheck {
  double worst_ratio = 0.0;
  double worst_time = 0.0;
  bool valid() const { return worst_ratio <= 0.01; }
};

struct SdePath {
  std::vector<double> t;
  std::vector<double> x_bar;
  std::vector<double> v_bar;
  /// Running Wiener path W(t), W(0) = 0; identically zero without fluctuations.
  std::vector<double> W;
  std::uint64_t seed = 0;
  bool fluctuations = false;
  LinearizationCheck linearization;
  std::vector<std::string> warnings;

  /// CSV t,x_bar,v_bar,W.
  void write(std::ostream& out) const {
    csv::Writer w(out, {"t", "x_bar", "v_bar", "W"});
    for (std::size_t n = 0; n < t.size(); ++n) w.row({t[n], x_bar[n], v_bar[n], W[n]});
  }
};

inline LinearizationCheck check_linearization(const SdePath& path, const PotentialSpec& V, double dq) {
  double f_ref = 0.0;
  for (double x : path.x_bar) f_ref = std::max(f_ref, std::abs(V.gradient(x)));
  LinearizationCheck c;
  for (std::size_t n = 0; n < path.t.size(); ++n) {
    const double df = 0.5 * std::abs(V.gradient(path.x_bar[n] + dq) - V.gradient(path.x_bar[n] - dq));
    const double r = df == 0.0 ? 0.0 : (f_ref > 0.0 ? df / f_ref : std::numeric_limits<double>::infinity());
    if (r > c.worst_ratio) c = {r, path.t[n]};
  }
  return c;
}

/// Mean position and velocity of the asymptotic packet:
///   dx = v dt + sqrt(hbar/M) dW,   dv = -V'(x)/M dt + sqrt(Lambda) hbar/M dW,
/// one Wiener increment feeding both. Euler-Maruyama with fluctuations,
/// classical RK4 without. The Wiener stream is (seed, wiener, path_index).
inline SdePath sde_evolve(const GaussianMeanState& s0, const PotentialSpec& V, double T, double dt, std::uint64_t seed,
                          bool fluctuations, std::uint64_t path_index = 0) {
  const auto& p = s0.params;
  p.validate();
  require(T > 0.0 && std::isfinite(T), Errc::invalid_argument, "T must be positive");
  require(dt > 0.0 && dt <= T / 1e3 * (1.0 + 1e-12), Errc::invalid_argument, "dt must be at most T/1000");
  const long steps = std::lround(std::ceil(T / dt - 1e-9));
  const double h = T / static_cast<double>(steps);

  SdePath path;
  path.seed = seed;
  path.fluctuations = fluctuations;
  const auto n_pts = static_cast<std::size_t>(steps) + 1;
  path.t.reserve(n_pts);
  path.x_bar.reserve(n_pts);
  path.v_bar.reserve(n_pts);
  path.W.reserve(n_pts);
  double x = s0.x_bar, v = s0.v_bar(), W = 0.0;
  auto push = [&](long n) {
    path.t.push_back(static_cast<double>(n) * h);
    path.x_bar.push_back(x);
    path.v_bar.push_back(v);
    path.W.push_back(W);
  };
  push(0);

  const double M = p.M;
  auto acc = [&](double y) { return -V.gradient(y) / M; };
  if (fluctuations) {
    auto rng = make_rng(seed, streams::wiener, path_index);
    const double ax = position_noise(p), av = velocity_noise(p), sq = std::sqrt(h);
    for (long n = 1; n <= steps; ++n) {
      const double dW = sq * rng.normal();
      const double a = acc(x);
      x += v * h + ax * dW;
      v += a * h + av * dW;
      W += dW;
      push(n);
    }
  } else {
    for (long n = 1; n <= steps; ++n) {
      const double k1x = v, k1v = acc(x);
      const double k2x = v + 0.5 * h * k1v, k2v = acc(x + 0.5 * h * k1x);
      const double k3x = v + 0.5 * h * k2v, k3v = acc(x + 0.5 * h * k2x);
      const double k4x = v + h * k3v, k4v = acc(x + h * k3x);
      x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
      v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
      push(n);
    }
  }
  require(std::isfinite(x) && std::isfinite(v), Errc::numeric_overflow, "mean trajectory diverged");

  path.linearization = check_linearization(path, V, s0.dq());
  if (!path.linearization.valid())
    path.warnings.push_back("linearization: force varies by " + std::to_string(100.0 * path.linearization.worst_ratio) +
                            "% of its path maximum across Delta q at t=" + std::to_string(path.linearization.worst_time));
  return path;
}

struct VelocityIdentityReport {
  double v_bohm;  // Bohmian velocity of the rendered packet at x_bar
  double v_bar;
  double error() const { return std::abs(v_bohm - v_bar); }
};

/// Bohmian velocity of the rendered asymptotic Gaussian at its centre.
inline VelocityIdentityReport bohmian_velocity_identity(const GaussianMeanState& s, const Grid1D& grid) {
  const auto frame = bohm::velocity_field(render(s, grid), s.params.units());
  return {frame.at(s.x_bar), s.v_bar()};
}

struct FlowTrackingReport {
  /// Starting offsets from x_bar(0).
  std::vector<double> offsets;
  /// Largest |(X_i(t) - x_bar(t)) - offset_i| over the run.
  double max_drift = 0.0;
  bool order_preserved = true;
  std::vector<std::vector<double>> trajectories;
};

/// Integrates Bohmian trajectories through the density family
/// rho(x, t) = |psi_asym(x; x_bar(t), p_bar(t))|^2 along a mean path. The
/// velocity is the continuity flow J / rho with J(x) = -int_{x_min}^x d_t rho,
/// d_t rho by central differences between consecutive path samples.
inline FlowTrackingReport track_flow(const GaussianMeanState& s0, const SdePath& path, const Grid1D& grid,
                                     std::vector<double> offsets) {
  require(path.t.size() >= 3, Errc::invalid_argument, "path needs at least three samples");
  const auto state_at = [&](std::size_t n) {
    auto s = s0;
    s.x_bar = path.x_bar[n];
    s.p_bar = path.v_bar[n] * s0.params.M;
    return s;
  };
  const auto density = [&](std::size_t n) {
    const auto psi = render(state_at(n), grid);
    std::vector<double> r(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) r[i] = std::norm(psi[i]);
    return r;
  };
  const std::size_t last = path.t.size() - 1;
  const std::size_t G = grid.size();

  std::vector<double> prev = density(0), cur = prev, next = density(1);
  auto frame_at = [&](std::size_t n) {
    const double dt = n == 0 ? path.t[1] - path.t[0] : (n == last ? path.t[n] - path.t[n - 1] : path.t[n + 1] - path.t[n - 1]);
    const auto& lo = n == 0 ? cur : prev;
    const auto& hi = n == last ? cur : next;
    double peak = 0.0;
    for (double r : cur) peak = std::max(peak, r);
    bohm::VelocityFieldFrame f{grid, std::vector<double>(G, 0.0), path.t[n]};
    double J = 0.0, dprev = 0.0;
    for (std::size_t i = 0; i < G; ++i) {
      const double d = (hi[i] - lo[i]) / dt;
      if (i > 0) J -= 0.5 * (d + dprev) * grid.dx();
      dprev = d;
      if (cur[i] > 1e-10 * peak) f.v[i] = J / cur[i];
    }
    return f;
  };

  FlowTrackingReport rep;
  rep.offsets = offsets;
  std::vector<double> X(offsets.size());
  for (std::size_t i = 0; i < X.size(); ++i) X[i] = path.x_bar[0] + offsets[i];
  rep.trajectories.assign(X.size(), {});
  for (std::size_t i = 0; i < X.size(); ++i) rep.trajectories[i].push_back(X[i]);

  auto frame = frame_at(0);
  for (std::size_t n = 1; n <= last; ++n) {
    prev = std::move(cur);
    cur = std::move(next);
    if (n < last) next = density(n + 1);
    auto f = frame_at(n);
    for (std::size_t i = 0; i < X.size(); ++i) {
      X[i] = bohm::rk4_step(X[i], frame, f);
      bohm::detail::check_inside(grid, X[i], i, path.t[n]);
      rep.trajectories[i].push_back(X[i]);
      rep.max_drift = std::max(rep.max_drift, std::abs(X[i] - path.x_bar[n] - offsets[i]));
    }
    for (std::size_t i = 1; i < X.size(); ++i)
      if ((X[i] - X[i - 1]) * (offsets[i] - offsets[i - 1]) <= 0.0) rep.order_preserved = false;
    frame = std::move(f);
  }
  return rep;
}

struct NewtonReport {
  double max_residual = 0.0;
  double worst_time = 0.0;
  SdePath path;
};

/// Deterministic mean path and the largest |x'' + V'(x)/M| with x'' from
/// second differences of the sampled path.
inline NewtonReport newton_check(const PotentialSpec& V, const QmuplParams& params, double x0, double v0, double T,
                                 double dt) {
  NewtonReport rep;
  rep.path = sde_evolve(asymptotic_state(params, x0, v0 * params.M), V, T, dt, 0, false);
  const auto& x = rep.path.x_bar;
  const double h = rep.path.t[1] - rep.path.t[0];
  for (std::size_t n = 1; n + 1 < x.size(); ++n) {
    const double a = (x[n + 1] - 2.0 * x[n] + x[n - 1]) / (h * h);
    const double r = std::abs(a + V.gradient(x[n]) / params.M);
    if (r > rep.max_residual) {
      rep.max_residual = r;
      rep.worst_time = rep.path.t[n];
    }
  }
  return rep;
}

}  // namespace bohmgrw::classical
