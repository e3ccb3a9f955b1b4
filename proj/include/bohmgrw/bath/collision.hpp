#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "bohmgrw/bohm/conditional.hpp"
#include "bohmgrw/field.hpp"
#include "bohmgrw/interp.hpp"

namespace bohmgrw::bath {

/// Switching profile of the von Neumann coupling: f = 1/(t_f - t_i) on
/// [t_i, t_f] and g its running integral. With t_f == t_i the interaction is
/// instantaneous and g jumps to 1 at t_i.
struct InteractionWindow {
  double t_i = 0.0;
  double t_f = 0.0;

  static InteractionWindow instantaneous(double t) { return {t, t}; }

  void validate() const {
    require(std::isfinite(t_i) && std::isfinite(t_f) && t_f >= t_i, Errc::invalid_argument,
            "interaction window needs t_f >= t_i");
  }
  bool is_instantaneous() const { return t_f == t_i; }

  double f(double t) const {
    if (is_instantaneous()) return 0.0;
    return (t >= t_i && t <= t_f) ? 1.0 / (t_f - t_i) : 0.0;
  }

  double g(double t) const {
    if (t >= t_f) return 1.0;
    if (t <= t_i) return 0.0;
    return (t - t_i) / (t_f - t_i);
  }
};

/// Environment packet: amplitude (2 pi sigma^2)^(-1/4) exp(-(y - a)^2 / 4 sigma^2),
/// meeting the system at Poisson rate `rate`.
struct BathParticleSpec {
  double sigma = 1.0;
  double a = 0.0;
  double rate = 1.0;

  void validate(bool allow_zero_rate = true) const {
    require(std::isfinite(sigma) && sigma > 0.0, Errc::invalid_argument, "bath packet width must be positive");
    require(std::isfinite(rate) && (allow_zero_rate ? rate >= 0.0 : rate > 0.0), Errc::invalid_argument,
            "collision rate must be positive");
  }
};

inline double bath_amplitude(double y, double sigma, double a = 0.0) {
  const double d = y - a;
  return std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25) * std::exp(-d * d / (4.0 * sigma * sigma));
}

/// psi(x, y, t) = psi(x, y - x g_t, t_i), cubic in y with zero outside the y
/// grid. Refuses to run if more than 1e-8 of the probability would be pushed
/// off the grid.
inline JointField2D shear_evolution(const JointField2D& joint0, const InteractionWindow& w, double t) {
  w.validate();
  const double g = w.g(t);
  const auto& gx = joint0.grid_x();
  const auto& gy = joint0.grid_y();
  const auto nx = gx.size(), ny = gy.size();
  const double cell = gx.dx() * gy.dx();

  double lost = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    const double shift = gx.x(i) * g;
    for (std::size_t j = 0; j < ny; ++j) {
      const double target = gy.x(j) + shift;
      if (!(target >= gy.x_min() && target <= gy.x(ny - 1))) lost += std::norm(joint0.at(i, j)) * cell;
    }
  }
  if (lost > 1e-8)
    throw Error(Errc::domain_escape, "shear at g=" + std::to_string(g) + " pushes probability " +
                                         sci(lost) + " off the y grid");

  JointField2D out(gx, gy);
  const auto nyl = static_cast<long>(ny);
  for (std::size_t i = 0; i < nx; ++i) {
    const double shift = gx.x(i) * g;
    auto sample = [&](long j) { return (j < 0 || j >= nyl) ? cplx(0.0) : joint0.at(i, static_cast<std::size_t>(j)); };
    for (std::size_t j = 0; j < ny; ++j) {
      const double s = (gy.x(j) - shift - gy.x_min()) / gy.dx();
      out.at(i, j) = interp::cubic(s, sample);
    }
  }
  return out;
}

/// Bohmian positions during the coupling: the system does not move and the
/// bath particle is displaced by X^0 g_t.
inline std::pair<double, double> collision_trajectories(double X0, double Y0, const InteractionWindow& w, double t) {
  return {X0, Y0 + X0 * w.g(t)};
}

/// System multiplier exp(-(Y(t) - a - g x)^2 / 4 sigma^2) left by a bath
/// packet centred at a; with Y(t) = a + Y0 + X0 g the centre a cancels.
inline double collision_multiplier(double x, double Y_t, double g, double sigma, double a = 0.0) {
  const double d = (Y_t - a) - g * x;
  return std::exp(-d * d / (4.0 * sigma * sigma));
}

struct ConditionalPair {
  bohm::ConditionalWaveFunction system;
  bohm::ConditionalWaveFunction bath;
};

/// Closed-form conditional wave functions for a factorized start
/// psi_S(x) x Gaussian bath packet: the system factor is psi_S times the
/// bath Gaussian evaluated at Y(t) - g x, the bath factor is that Gaussian
/// displaced by g X^0.
inline ConditionalPair conditional_pair(const ComplexField1D& psi_S, const Grid1D& grid_y, double sigma, double X0,
                                        double Y0, const InteractionWindow& w, double t, double a = 0.0) {
  require(sigma > 0.0, Errc::invalid_argument, "bath packet width must be positive");
  const double g = w.g(t);
  const double Yt = a + Y0 + X0 * g;

  ComplexField1D sys = psi_S;
  for (std::size_t i = 0; i < sys.size(); ++i) sys[i] *= collision_multiplier(psi_S.grid().x(i), Yt, g, sigma, a);
  const double n2 = sys.norm_squared();
  if (!(n2 > 1e-28))
    throw Error(Errc::null_slice, "conditional system wave function vanishes at Y=" + std::to_string(Yt));
  sys.normalize();

  auto env = ComplexField1D::from_function(grid_y, [&](double y) { return cplx(bath_amplitude(y - g * X0, sigma, a)); });
  require(env.norm_squared() > 1e-28, Errc::null_slice, "bath conditional packet lies outside its grid");
  env.normalize();
  return {{std::move(sys), Yt}, {std::move(env), X0}};
}

}  // namespace bohmgrw::bath
