#pragma once

// Spectral split-operator propagation and spectral observables.

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bohmgrw/error.hpp"
#include "bohmgrw/fft.hpp"
#include "bohmgrw/field.hpp"
#include "bohmgrw/grid.hpp"

namespace bohmgrw {

/// d/dx of uniformly sampled periodic data; the Nyquist bin is dropped so
/// real input gives real output.
inline std::vector<cplx> spectral_derivative(std::span<const cplx> values, const Grid1D& grid) {
  std::vector<cplx> buf(values.begin(), values.end());
  fft::forward(buf);
  const auto n = grid.size();
  for (std::size_t i = 0; i < n; ++i) buf[i] *= (i == n / 2) ? cplx(0.0) : cplx(0.0, grid.k(i));
  fft::inverse(buf);
  return buf;
}

/// Same as above for real samples, computed so the result is exactly real.
inline std::vector<double> spectral_derivative_real(std::span<const double> values,
                                                    const Grid1D& grid) {
  std::vector<cplx> buf(values.begin(), values.end());
  const auto d = spectral_derivative(buf, grid);
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = d[i].real();
  return out;
}

/// Fraction of spectral weight at |k| > cutoff * k_Nyquist.
inline double spectral_tail_mass(const ComplexField1D& psi, double cutoff = 0.8) {
  std::vector<cplx> buf(psi.values().begin(), psi.values().end());
  fft::forward(buf);
  const auto& g = psi.grid();
  double total = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const double w = std::norm(buf[i]);
    total += w;
    if (std::abs(g.k(i)) > cutoff * g.k_nyquist()) tail += w;
  }
  return total > 0.0 ? tail / total : 0.0;
}

/// Second-order Strang splitting exp(-iV dt/2) F^-1 exp(-i hbar k^2 dt/2m) F exp(-iV dt/2).
/// Holds the precomputed phase factors for one (grid, V, units, dt).
class SplitStepPropagator {
 public:
  SplitStepPropagator(const Grid1D& grid, const PotentialSpec& potential, const UnitsContext& units,
                      double dt)
      : grid_(grid), dt_(dt), half_potential_(grid.size()), kinetic_(grid.size()) {
    units.validate();
    require(std::isfinite(dt), Errc::invalid_argument, "time step must be finite");
    const auto v = potential.sample(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      half_potential_[i] = std::exp(cplx(0.0, -v[i] * dt / (2.0 * units.hbar)));
      const double k = grid.k(i);
      kinetic_[i] = std::exp(cplx(0.0, -units.hbar * k * k * dt / (2.0 * units.mass)));
    }
    free_ = potential.is_free();
  }

  const Grid1D& grid() const { return grid_; }
  double dt() const { return dt_; }

  void step(std::span<cplx> psi) const {
    if (!free_)
      for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= half_potential_[i];
    fft::forward(psi);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= kinetic_[i];
    fft::inverse(psi);
    if (!free_)
      for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= half_potential_[i];
  }

  void step(ComplexField1D& psi) const { step(psi.values()); }

 private:
  Grid1D grid_;
  double dt_;
  std::vector<cplx> half_potential_;
  std::vector<cplx> kinetic_;
  bool free_ = false;
};

struct PropagateOptions {
  /// Spectral weight allowed above 0.8 k_Nyquist before refusing to run.
  double max_tail_mass = 1e-8;
  /// Maximum |psi|^2 tolerated near the grid edges; nullopt disables the check.
  std::optional<double> boundary_tolerance = 1e-10;
};

inline void check_boundary(const ComplexField1D& psi, const PropagateOptions& opts,
                           const std::string& where) {
  if (!opts.boundary_tolerance) return;
  const double b = boundary_density(psi);
  if (b > *opts.boundary_tolerance)
    throw Error(Errc::domain_escape, where + ": boundary density " + sci(b) + " exceeds watchdog tolerance " +
                                         sci(*opts.boundary_tolerance));
}

inline void check_resolved(const ComplexField1D& psi, const PropagateOptions& opts) {
  const double tail = spectral_tail_mass(psi);
  if (tail > opts.max_tail_mass)
    throw Error(Errc::aliasing, "spectral tail mass " + sci(tail) +
                                    " above 0.8 k_Nyquist; refine the grid");
}

/// psi(t + steps*dt) by Strang splitting.
inline ComplexField1D split_step_propagate(const ComplexField1D& psi, const PotentialSpec& potential,
                                           const UnitsContext& units, double dt, long steps,
                                           const PropagateOptions& opts = {}) {
  require(steps >= 0, Errc::invalid_argument, "step count must be non-negative");
  require(psi.all_finite(), Errc::numeric_overflow, "non-finite amplitude in initial field");
  check_resolved(psi, opts);
  SplitStepPropagator prop(psi.grid(), potential, units, dt);
  ComplexField1D out = psi;
  for (long s = 0; s < steps; ++s) {
    prop.step(out);
    check_boundary(out, opts, "split_step_propagate step " + std::to_string(s + 1));
  }
  require(out.all_finite(), Errc::numeric_overflow, "non-finite amplitude after propagation");
  return out;
}

inline RealField1D probability_density(const ComplexField1D& psi) {
  require(psi.all_finite(), Errc::numeric_overflow, "non-finite amplitude");
  std::vector<double> rho(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) rho[i] = std::norm(psi[i]);
  return {psi.grid(), std::move(rho)};
}

enum class Observable { position, momentum };

/// <x> by quadrature or <p> = <psi| -i hbar d/dx |psi> spectrally.
inline double expectation(const ComplexField1D& psi, Observable obs, double hbar = 1.0) {
  const auto& g = psi.grid();
  if (obs == Observable::position) {
    double s = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) s += g.x(i) * std::norm(psi[i]);
    return s * g.dx();
  }
  const auto d = spectral_derivative(psi.values(), g);
  cplx s = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) s += std::conj(psi[i]) * cplx(0.0, -hbar) * d[i];
  return s.real() * g.dx();
}

/// Standard deviations (Delta x, Delta p) of a normalized field. Delta p is
/// computed from the momentum-space density.
struct Spreads {
  double dq;
  double dp;
};

inline Spreads spreads(const ComplexField1D& psi, double hbar = 1.0) {
  const auto& g = psi.grid();
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double w = std::norm(psi[i]);
    m1 += g.x(i) * w;
    m2 += g.x(i) * g.x(i) * w;
  }
  m1 *= g.dx();
  m2 *= g.dx();
  std::vector<cplx> buf(psi.values().begin(), psi.values().end());
  fft::forward(buf);
  double w0 = 0.0, p1 = 0.0, p2 = 0.0;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const double w = std::norm(buf[i]);
    const double p = hbar * g.k(i);
    w0 += w;
    p1 += p * w;
    p2 += p * p * w;
  }
  p1 /= w0;
  p2 /= w0;
  return {std::sqrt(std::max(0.0, m2 - m1 * m1)), std::sqrt(std::max(0.0, p2 - p1 * p1))};
}

}  // namespace bohmgrw
