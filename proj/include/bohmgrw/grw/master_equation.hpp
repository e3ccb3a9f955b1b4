#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "bohmgrw/bohm/density_matrix.hpp"
#include "bohmgrw/grw/collapse.hpp"
#include "bohmgrw/parallel.hpp"

namespace bohmgrw::grw {

using bohm::DensityMatrix1D;

/// Dense grid Hamiltonian: spectral kinetic matrix F^-1 diag(hbar^2 k^2 / 2m) F
/// plus diag(V). It is the generator the split-step propagator exponentiates.
inline Eigen::MatrixXd grid_hamiltonian(const Grid1D& g, const PotentialSpec& potential, const UnitsContext& units) {
  const auto n = g.size();
  // The kinetic matrix is circulant: entry (i, j) depends on (i - j) mod n.
  std::vector<double> column(n, 0.0);
  for (std::size_t d = 0; d < n; ++d) {
    double acc = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
      const double k = g.k(q);
      acc += std::cos(k * static_cast<double>(d) * g.dx()) * k * k;
    }
    column[d] = acc * units.hbar * units.hbar / (2.0 * units.mass * static_cast<double>(n));
  }
  const auto v = potential.sample(g);
  Eigen::MatrixXd h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = column[(i + n - j) % n] + (i == j ? v[i] : 0.0);
  return h;
}

struct MasterOptions {
  UnitsContext units = UnitsContext::natural();
  double max_dt = 1e-2;
  /// With false only the collapse term acts.
  bool hamiltonian = true;
  double trace_tolerance = 1e-6;
  /// Sees the state after every RK4 step.
  std::function<void(double, const DensityMatrix1D&)> on_step{};
};

/// d rho/dt = -(i/hbar)[H, rho] + N lambda (rho o G - rho), where
/// G(x, x') = exp(-(x - x')^2 / 4 r_C^2) is the Gaussian integral of
/// L(z) rho L(z) over z. Classical RK4; dt is capped by the RK4 stability
/// bound of the spectrum.
inline DensityMatrix1D master_equation_evolve(const DensityMatrix1D& rho0, const PotentialSpec& potential,
                                              const GrwParams& params, double T, const MasterOptions& opts = {}) {
  params.validate(true);
  opts.units.validate();
  require(T >= 0.0 && std::isfinite(T), Errc::invalid_argument, "duration must be non-negative");
  const auto& g = rho0.grid;
  const auto n = static_cast<Eigen::Index>(g.size());
  const double rate = params.rate();

  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  double spread = 0.0;
  if (opts.hamiltonian) {
    const Eigen::MatrixXd hr = grid_hamiltonian(g, potential, opts.units);
    h = hr.cast<cplx>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hr, Eigen::EigenvaluesOnly);
    spread = (es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff()) / opts.units.hbar;
  }
  Eigen::MatrixXd gm1(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = g.x(static_cast<std::size_t>(i)) - g.x(static_cast<std::size_t>(j));
      gm1(i, j) = std::exp(-d * d / (4.0 * params.r_C * params.r_C)) - 1.0;
    }

  const cplx minus_i_over_hbar(0.0, -1.0 / opts.units.hbar);
  auto deriv = [&](const Eigen::MatrixXcd& r) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd out = rate * r.cwiseProduct(gm1.cast<cplx>());
    if (opts.hamiltonian) {
      Eigen::MatrixXcd comm = h * r;
      comm.noalias() -= r * h;
      out += minus_i_over_hbar * comm;
    }
    return out;
  };

  // |z| <= 2 keeps the step inside RK4's stability region on both axes.
  const double dt_stable = 2.0 / std::max(spread + 2.0 * rate, 1e-300);
  const double target = std::min(opts.max_dt, dt_stable);
  const long steps = T == 0.0 ? 0 : std::max(1L, static_cast<long>(std::ceil(T / target - 1e-9)));
  const double dt = steps > 0 ? T / static_cast<double>(steps) : 0.0;

  DensityMatrix1D rho = rho0;
  const double trace0 = rho0.trace();
  for (long s = 1; s <= steps; ++s) {
    const Eigen::MatrixXcd k1 = deriv(rho.values);
    const Eigen::MatrixXcd k2 = deriv(rho.values + 0.5 * dt * k1);
    const Eigen::MatrixXcd k3 = deriv(rho.values + 0.5 * dt * k2);
    const Eigen::MatrixXcd k4 = deriv(rho.values + dt * k3);
    rho.values += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double drift = std::abs(rho.trace() - trace0);
    if (!(drift <= opts.trace_tolerance))
      throw Error(Errc::integrator_tolerance,
                  "trace drift " + std::to_string(drift) + " at step " + std::to_string(s));
    if (opts.on_step) opts.on_step(static_cast<double>(s) * dt, rho);
  }
  return rho;
}

/// Noise average of |psi><psi| over independent GRW realizations, taken at
/// each requested time (snapped to the run's step grid). Run r uses the
/// streams GrwStreams::for_run(seed, r).
inline std::vector<DensityMatrix1D> grw_ensemble_density(const ComplexField1D& psi0, const PotentialSpec& potential,
                                                         const GrwParams& params, double T, std::size_t runs,
                                                         std::uint64_t seed, std::vector<double> times,
                                                         GrwOptions opts = {}) {
  require(runs >= 1, Errc::invalid_argument, "need at least one realization");
  require(psi0.size() <= bohm::max_density_grid, Errc::resource_limit, "grid too large for a density matrix");
  if (times.empty()) times.push_back(T);
  const auto [steps, dt] = grw_stepping(T, params.rate(), opts.max_dt);
  std::vector<long> at_step;
  for (double t : times) {
    require(t >= 0.0 && t <= T * (1.0 + 1e-12), Errc::invalid_argument, "snapshot time outside [0, T]");
    at_step.push_back(std::lround(t / dt));
  }

  const auto n = static_cast<Eigen::Index>(psi0.size());
  const auto blocks = make_blocks(runs, 64);
  std::vector<std::vector<Eigen::MatrixXcd>> partial(blocks.size());
  parallel_for(blocks.size(), [&](std::size_t b) {
    auto& acc = partial[b];
    acc.assign(times.size(), Eigen::MatrixXcd::Zero(n, n));
    GrwOptions local = opts;
    local.on_step = [&](const ComplexField1D& psi, long s, double) {
      for (std::size_t k = 0; k < at_step.size(); ++k)
        if (at_step[k] == s) {
          Eigen::Map<const Eigen::VectorXcd> v(psi.values().data(), n);
          acc[k].noalias() += v * v.adjoint();
        }
    };
    for (std::size_t r = blocks[b].begin; r < blocks[b].end; ++r)
      (void)evolve_grw(psi0, potential, params, T, GrwStreams::for_run(seed, r), local);
  });

  std::vector<DensityMatrix1D> out(times.size(), DensityMatrix1D(psi0.grid()));
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (const auto& p : partial) out[k].values += p[k];
    out[k].values /= static_cast<double>(runs);
  }
  return out;
}

}  // namespace bohmgrw::grw
