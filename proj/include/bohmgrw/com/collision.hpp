#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "bohmgrw/bath/collision.hpp"
#include "bohmgrw/com/many_body.hpp"

namespace bohmgrw::com {

/// A bath packet of width sigma, centred at a, meeting particle k (1-based)
/// at initial bath position a + Y0.
struct ParticleCollision {
  std::size_t k = 1;
  double Y0 = 0.0;
  double sigma = 1.0;
  double a = 0.0;
};

template <class State>
struct ComCollision {
  State state;
  /// Positions after the hit; the system particles do not move.
  ManyBodyConfig config;
  /// Bath position Y_k(t) = a + Y0 + g X_k0.
  double Y_k;
  /// Y_cm(t) = Y0 + g X_cm0 (relative to a).
  double Y_cm;
  /// Largest rearrangement residual over the centre-of-mass grid.
  double identity_residual;
  /// Slice of the updated N-body state.
  ComConditionalState conditional;
  /// Slice before the hit times exp(-(Y_cm - g x_cm)^2 / 4 sigma^2), renormalized.
  ComConditionalState com_law;
};

namespace detail {

inline void apply_collision(GaussianManyBody& psi, std::size_t k, double c, double g, double sigma) {
  // exp(-(c - g x_k)^2 / 4 sigma^2) up to a constant.
  const auto i = static_cast<Eigen::Index>(k - 1);
  psi.A(i, i) += g * g / (2.0 * sigma * sigma);
  psi.b(i) += c * g / (2.0 * sigma * sigma);
}

inline void apply_collision(TabulatedManyBody& psi, std::size_t k, double Y_k, double g, double sigma, double a) {
  psi.multiply_along(k, [&](double x) { return bath::collision_multiplier(x, Y_k, g, sigma, a); });
}

}  // namespace detail

/// Collision of one bath particle with particle k of the system. Applies
/// exp(-(Y_k(t) - a - g x_k)^2 / 4 sigma^2) to the N-body state and also
/// returns the centre-of-mass slice predicted by the single-particle law
/// with (X0, Y0) -> (X_cm0, Y0).
template <class State>
ComCollision<State> collision_on_particle_k(const State& psi, const ManyBodyConfig& X0, const ParticleCollision& hit,
                                            const bath::InteractionWindow& w, double t, const Grid1D& grid_cm) {
  w.validate();
  const std::size_t N = X0.N();
  require(N == psi.N(), Errc::invalid_argument, "configuration and state disagree on N");
  require(hit.k >= 1 && hit.k <= N, Errc::invalid_argument, "collision target out of range");
  require(hit.sigma > 0.0, Errc::invalid_argument, "bath packet width must be positive");

  const auto [X_cm0, R0] = com_split(X0);
  const auto before = com_conditional(psi, R0, grid_cm);
  const double g = w.g(t);
  const double X_k0 = X0.X[hit.k - 1];
  const double Y_k = hit.a + hit.Y0 + X_k0 * g;
  const double Y_cm = hit.Y0 + g * X_cm0;

  double residual = 0.0;
  const double R_k0 = relative_coordinate(R0, hit.k);
  for (std::size_t i = 0; i < grid_cm.size(); ++i)
    residual = std::max(residual, exponent_identity_residual(hit.Y0, X_cm0, R_k0, R_k0, grid_cm.x(i), g));

  State after = psi;
  if constexpr (std::is_same_v<State, GaussianManyBody>)
    detail::apply_collision(after, hit.k, hit.Y0 + g * X_k0, g, hit.sigma);
  else
    detail::apply_collision(after, hit.k, Y_k, g, hit.sigma, hit.a);

  auto law = before.field;
  for (std::size_t i = 0; i < law.size(); ++i) law[i] *= bath::collision_multiplier(grid_cm.x(i), Y_cm, g, hit.sigma);
  auto com_law = detail::finish_slice(std::move(law), R0, "centre-of-mass slice after collision");
  auto conditional = com_conditional(after, R0, grid_cm);
  return {std::move(after), X0, Y_k, Y_cm, residual, std::move(conditional), std::move(com_law)};
}

}  // namespace bohmgrw::com
