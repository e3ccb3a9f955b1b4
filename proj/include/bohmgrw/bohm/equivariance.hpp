#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "bohmgrw/bohm/trajectories.hpp"
#include "bohmgrw/sampling.hpp"

namespace bohmgrw::bohm {

struct EquivarianceCheck {
  double time;
  KsReport ks;
};

struct EquivarianceReport {
  std::vector<EquivarianceCheck> checks;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.ks.pass()) return false;
    return true;
  }

  /// Structured text form, one block per sampled time.
  void write(std::ostream& out) const {
    for (const auto& c : checks) {
      out << "[equivariance t=" << csv::format(c.time) << "]\n"
          << "ks = " << csv::format(c.ks.statistic) << "\n"
          << "critical = " << csv::format(c.ks.critical) << "\n"
          << "n = " << c.ks.n << "\n"
          << "verdict = " << (c.ks.pass() ? "pass" : "fail") << "\n";
    }
  }
};

/// Samples n starting points from |psi0|^2, transports them with the
/// guidance equation and compares their empirical law at each requested
/// time against |psi(t)|^2 (KS at 99%). Time 0 is the sampler baseline.
inline EquivarianceReport verify_equivariance(const ComplexField1D& psi0, const PotentialSpec& potential,
                                              const UnitsContext& units, std::size_t n,
                                              std::vector<double> times, double dt, std::uint64_t seed,
                                              const PropagateOptions& opts = {}) {
  require(n >= 1000, Errc::invalid_argument, "equivariance check needs at least 1000 trajectories");
  std::sort(times.begin(), times.end());
  EquivarianceReport report;
  auto record = [&](const ComplexField1D& psi, const TrajectoryEnsemble& ens) {
    const DiscreteCdf cdf(probability_density(psi));
    report.checks.push_back({ens.time, {ks_statistic(ens.positions, std::ref(cdf)), ks_critical(n), n}});
  };
  ComplexField1D psi = psi0;
  auto ens = equilibrium_ensemble(psi, n, seed);
  long done = 0;
  for (double t : times) {
    const long target = std::lround(t / dt);
    if (target > done) {
      auto out = evolve_guided(std::move(psi), std::move(ens), potential, units, dt, target - done, opts);
      psi = std::move(out.psi);
      ens = std::move(out.ensemble);
      done = target;
    }
    record(psi, ens);
  }
  return report;
}

}  // namespace bohmgrw::bohm
