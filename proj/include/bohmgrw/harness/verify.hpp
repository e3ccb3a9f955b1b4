#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bohmgrw/bath/collision.hpp"
#include "bohmgrw/bath/estimates.hpp"
#include "bohmgrw/bath/multi_collision.hpp"
#include "bohmgrw/bohm/conditional.hpp"
#include "bohmgrw/bohm/equivariance.hpp"
#include "bohmgrw/bohm/trajectories.hpp"
#include "bohmgrw/classical/qmupl.hpp"
#include "bohmgrw/classical/sde.hpp"
#include "bohmgrw/com/amplification.hpp"
#include "bohmgrw/com/many_body.hpp"
#include "bohmgrw/grw/collapse.hpp"
#include "bohmgrw/grw/master_equation.hpp"
#include "bohmgrw/harness/config.hpp"
#include "bohmgrw/harness/report.hpp"
#include "bohmgrw/propagate.hpp"
#include "bohmgrw/sampling.hpp"

namespace bohmgrw::harness {

struct VerifyOptions {
  /// Check names (bare or module/name) whose measurement is corrupted.
  std::set<std::string> inject;
};

struct SuiteEntry {
  std::string module;
  CheckResult check;
};

struct SuiteReport {
  std::uint64_t seed = 0;
  std::vector<SuiteEntry> entries;

  bool pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const SuiteEntry& e) { return e.check.pass; });
  }

  /// Pass/fail matrix. Contains nothing that varies between runs with the
  /// same seed.
  void write(std::ostream& out) const {
    char buf[160];
    out << tool_name << " " << tool_version << " verification suite\nseed = " << seed << "\n\n";
    std::snprintf(buf, sizeof buf, "%-20s %-26s %12s %3s %12s  %s\n", "module", "check", "value", "", "limit", "verdict");
    out << buf;
    for (const auto& e : entries) {
      std::snprintf(buf, sizeof buf, "%-20s %-26s %12s %3s %12s  %s\n", e.module.c_str(), e.check.name.c_str(),
                    short_number(e.check.value).c_str(), e.check.relation.c_str(), short_number(e.check.limit).c_str(),
                    e.check.pass ? "pass" : "FAIL");
      out << buf;
    }
    out << "\n";
    std::vector<std::string> order;
    std::map<std::string, std::pair<int, int>> tally;
    for (const auto& e : entries) {
      if (!tally.count(e.module)) order.push_back(e.module);
      auto& t = tally[e.module];
      (e.check.pass ? t.first : t.second) += 1;
    }
    for (const auto& m : order) {
      std::snprintf(buf, sizeof buf, "%-20s %d pass, %d fail\n", m.c_str(), tally[m].first, tally[m].second);
      out << buf;
    }
    std::size_t passed = 0;
    for (const auto& e : entries) passed += e.check.pass ? 1 : 0;
    out << "\noverall = " << (pass() ? "pass" : "fail") << " (" << passed << "/" << entries.size() << ")\n";
  }
};

namespace detail {

inline ComplexField1D lobes(const Grid1D& g, double separation, double width) {
  const auto l = gaussian_packet(g, -separation / 2, width), r = gaussian_packet(g, separation / 2, width);
  ComplexField1D psi(g);
  for (std::size_t i = 0; i < g.size(); ++i) psi[i] = l[i] + r[i];
  psi.normalize();
  return psi;
}

/// Makes a measured value fail its comparison by a wide margin.
inline void corrupt(CheckResult& c) {
  if (c.relation == "<=") c.value = 10.0 * std::abs(c.limit) + 1.0;
  else if (c.relation == ">=") c.value = c.limit - 10.0 * std::abs(c.limit) - 1.0;
  else c.value = 0.0;
  c.pass = false;
}

}  // namespace detail

/// Every module's invariants at desk scale.
inline SuiteReport verify_all(std::uint64_t seed, const VerifyOptions& opts = {}) {
  SuiteReport rep;
  rep.seed = seed;
  const auto nat = UnitsContext::natural();
  const auto injected = [&](const std::string& module, const std::string& name) {
    return opts.inject.count(name) > 0 || opts.inject.count(module + "/" + name) > 0;
  };
  // A check that throws is reported as failed.
  const auto add = [&](const std::string& module, const std::string& name, const std::function<CheckResult(bool)>& f) {
    CheckResult c;
    const bool inject = injected(module, name);
    try {
      c = f(inject);
    } catch (const std::exception&) {
      c = CheckResult::holds(name, false);
    }
    c.name = name;
    if (inject && c.pass) detail::corrupt(c);
    rep.entries.push_back({module, c});
  };

  // numerics-core
  add("numerics-core", "norm-drift", [&](bool inject) {
    const Grid1D g = Grid1D::centered(20.0, 256);
    auto psi = split_step_propagate(gaussian_packet(g, -2.0, 1.0, 1.5), PotentialSpec::harmonic(1.0), nat, 1e-2, 1000);
    // The injected fault is a tiny non-unitary rescaling.
    if (inject)
      for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= 1.0 + 1e-6;
    return CheckResult::at_most("", std::abs(psi.norm_squared() - 1.0), 1e-8);
  });
  add("numerics-core", "strang-order", [&](bool) {
    const Grid1D g = Grid1D::centered(20.0, 256);
    const auto psi0 = gaussian_packet(g, -2.0, 1.0, 1.0);
    const auto V = PotentialSpec::harmonic(1.0);
    const auto ref = split_step_propagate(psi0, V, nat, 1e-3 / 8, 8000);
    const double e1 = sup_distance(split_step_propagate(psi0, V, nat, 0.02, 50), ref);
    const double e2 = sup_distance(split_step_propagate(psi0, V, nat, 0.01, 100), ref);
    return CheckResult::at_least("", std::log2(e1 / e2), 1.8);
  });
  add("numerics-core", "rng-streams", [&](bool) {
    auto a = make_rng(seed, streams::misc, 3), b = make_rng(seed, streams::misc, 3), c = make_rng(seed, streams::misc, 4);
    bool same = true, distinct = false;
    for (int i = 0; i < 1000; ++i) {
      const double x = a.uniform();
      same = same && x == b.uniform();
      distinct = distinct || x != c.uniform();
    }
    return CheckResult::holds("", same && distinct);
  });
  add("numerics-core", "sampler-ks", [&](bool) {
    const Grid1D g = Grid1D::centered(10.0, 512);
    auto rng = make_rng(seed, streams::initial_positions);
    const std::size_t n = 10000;
    const auto xs = sample_from_density(probability_density(gaussian_packet(g, 0.5, 1.0)), rng, n);
    const double ks = ks_statistic(xs, [](double x) { return 0.5 * std::erfc(-(x - 0.5) / std::sqrt(2.0)); });
    return CheckResult::at_most("", ks, ks_critical(n));
  });

  // bohmian-dynamics
  add("bohmian-dynamics", "equivariance", [&](bool) {
    const Grid1D g = Grid1D::centered(40.0, 1024);
    const auto rep_eq = bohm::verify_equivariance(counter_propagating_pair(g, 5.0, 1.0, 2.0), PotentialSpec::free(),
                                                  nat, 5000, {1.0, 2.5, 5.0}, 1e-2, seed);
    double worst = 0.0;
    for (const auto& c : rep_eq.checks) worst = std::max(worst, c.ks.statistic / c.ks.critical);
    return CheckResult::at_most("", worst, 1.0);
  });
  add("bohmian-dynamics", "no-crossing", [&](bool) {
    const Grid1D g = Grid1D::centered(40.0, 1024);
    const auto psi = counter_propagating_pair(g, 5.0, 1.0, 2.0);
    auto ens = bohm::equilibrium_ensemble(psi, 400, seed);
    const auto start = ens.positions;
    bool ok = true;
    bohm::evolve_guided(psi, ens, PotentialSpec::free(), nat, 5e-3, 1000, {},
                        [&](const ComplexField1D&, const bohm::TrajectoryEnsemble& e) {
                          ok = ok && bohm::order_preserved(start, e.positions);
                        });
    return CheckResult::holds("", ok);
  });
  add("bohmian-dynamics", "permutation-invariance", [&](bool) {
    const Grid1D g = Grid1D::centered(40.0, 1024);
    const auto psi = counter_propagating_pair(g, 5.0, 1.0, 2.0);
    auto ens = bohm::equilibrium_ensemble(psi, 200, seed);
    auto shuffled = ens;
    std::reverse(shuffled.positions.begin(), shuffled.positions.end());
    auto a = bohm::evolve_guided(psi, ens, PotentialSpec::free(), nat, 5e-3, 1000).ensemble.positions;
    auto b = bohm::evolve_guided(psi, shuffled, PotentialSpec::free(), nat, 5e-3, 1000).ensemble.positions;
    std::reverse(b.begin(), b.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return CheckResult::at_most("", worst, 1e-12);
  });

  // grw-collapse
  add("grw-collapse", "collapse-count", [&](bool) {
    const double rate = 3.0, T = 1.0;
    const std::size_t runs = 4000;
    double sum = 0.0;
    for (std::size_t r = 0; r < runs; ++r) {
      grw::PoissonClock clock(rate, grw::GrwStreams::for_run(seed, r).clock);
      while (clock.next_event() <= T) {
        clock.pop();
        sum += 1.0;
      }
    }
    const double mean = sum / static_cast<double>(runs);
    return CheckResult::at_most("", std::abs(mean - rate * T) / std::sqrt(rate * T / static_cast<double>(runs)), 4.0);
  });
  add("grw-collapse", "unraveling", [&](bool) {
    const Grid1D g = Grid1D::centered(10.0, 64);
    const auto psi0 = detail::lobes(g, 5.0, 0.7);
    const grw::GrwParams p{1.0, 1.5, 1};
    const std::size_t runs = 1000;
    grw::GrwOptions o;
    o.max_dt = 1e-3;
    const auto mc = grw::grw_ensemble_density(psi0, PotentialSpec::free(), p, 0.5, runs, seed, {0.5}, o);
    const auto me = grw::master_equation_evolve(bohm::DensityMatrix1D::pure(psi0), PotentialSpec::free(), p, 0.5);
    return CheckResult::at_most("", mc[0].max_deviation(me), 5.0 / std::sqrt(static_cast<double>(runs)));
  });
  add("grw-collapse", "master-decay", [&](bool) {
    const Grid1D g = Grid1D::centered(8.0, 64);
    const auto rho0 = bohm::DensityMatrix1D::pure(gaussian_packet(g, 0.0, 2.0, 0.5));
    const grw::GrwParams p{1.3, 1.2, 2};
    grw::MasterOptions mo;
    mo.hamiltonian = false;
    const double T = 0.8;
    const auto rho = grw::master_equation_evolve(rho0, PotentialSpec::free(), p, T, mo);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < rho.values.rows(); ++i)
      for (Eigen::Index j = 0; j < rho.values.cols(); ++j) {
        const double d = g.x(static_cast<std::size_t>(i)) - g.x(static_cast<std::size_t>(j));
        const double rate = p.rate() * (1 - std::exp(-d * d / (4 * p.r_C * p.r_C)));
        worst = std::max(worst, std::abs(rho.values(i, j) - rho0.values(i, j) * std::exp(-rate * T)));
      }
    return CheckResult::at_most("", worst, 1e-8);
  });

  // bath-interaction
  add("bath-interaction", "conditional-closed-form", [&](bool) {
    const Grid1D gx = Grid1D::centered(8.0, 256), gy = Grid1D::centered(12.0, 512);
    const double sigma = 0.7;
    const auto psi_S = detail::lobes(gx, 4.0, 0.6);
    const auto env = ComplexField1D::from_function(gy, [&](double y) { return cplx(bath::bath_amplitude(y, sigma)); });
    const auto joint = JointField2D::product(psi_S, env);
    const bath::InteractionWindow w{0.0, 1.0};
    auto rng = make_rng(seed, streams::misc, 11);
    const double X0 = rng.uniform(-2.5, 2.5), Y0 = sigma * rng.normal();
    double worst = 0.0;
    for (double t : {0.5, 1.0}) {
      const auto [X, Y] = bath::collision_trajectories(X0, Y0, w, t);
      const auto numeric = bohm::conditional_wavefunction(bath::shear_evolution(joint, w, t), Y);
      worst = std::max(worst, sup_distance(numeric.field, bath::conditional_pair(psi_S, gy, sigma, X0, Y0, w, t).system.field));
    }
    return CheckResult::at_most("", worst, 1e-6);
  });
  add("bath-interaction", "z-statistics", [&](bool) {
    const Grid1D g = Grid1D::centered(20.0, 512);
    const auto stats = bath::localization_center_statistics(detail::lobes(g, 6.0, 0.7), 0.8, 10000, seed);
    return CheckResult::at_most("", stats.ks.statistic, stats.ks.critical);
  });
  add("bath-interaction", "center-cancellation", [&](bool) {
    const Grid1D g = Grid1D::centered(20.0, 256);
    const auto psi0 = detail::lobes(g, 6.0, 0.7);
    const bath::BathParticleSpec spec{0.8, 0.0, 3.0};
    bath::MultiCollisionOptions a, b;
    b.center_spread = 10.0;
    const auto ra = bath::multi_collision_run(psi0, PotentialSpec::free(), spec, 1.5, seed, 3, a);
    const auto rb = bath::multi_collision_run(psi0, PotentialSpec::free(), spec, 1.5, seed, 3, b);
    if (ra.collisions.size() != rb.collisions.size()) return CheckResult::holds("", false);
    return CheckResult::at_most("", std::max(sup_distance(ra.psi, rb.psi), std::abs(ra.X - rb.X)), 1e-10);
  });
  add("bath-interaction", "atmosphere-eta", [&](bool) {
    return CheckResult::at_most("", std::abs(bath::environment_estimates().eta / 3.6e22 - 1.0), 0.03);
  });

  // com-amplification
  add("com-amplification", "exponent-identity", [&](bool) {
    auto rng = make_rng(seed, streams::misc, 12);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double Y0 = rng.uniform(-10, 10), Xcm = rng.uniform(-10, 10), Rk = rng.uniform(-3, 3),
                   rk = rng.uniform(-3, 3), xcm = rng.uniform(-10, 10), gg = rng.uniform(0, 1);
      worst = std::max(worst, com::exponent_identity_residual(Y0, Xcm, Rk, rk, xcm, gg));
    }
    return CheckResult::at_most("", worst, 1e-10);
  });
  add("com-amplification", "slope", [&](bool) {
    const auto r = com::measure_amplification({1, 2, 4, 8}, 1.0, 200, seed);
    return CheckResult::at_most("", std::abs(r.slope - 1.0), 0.1);
  });

  // classical-limit
  add("classical-limit", "uncertainty-product", [&](bool) {
    double worst = 0.0;
    for (const auto& p : {classical::QmuplParams::natural(), classical::QmuplParams::atmosphere_sphere()})
      worst = std::max(worst, std::abs(classical::delta_q(p) * classical::delta_p(p) / (p.hbar / std::sqrt(2.0)) - 1.0));
    return CheckResult::at_most("", worst, 1e-10);
  });
  add("classical-limit", "newton-residual", [&](bool) {
    const auto p = classical::QmuplParams::natural();
    const double T = 2.0 * std::numbers::pi;
    return CheckResult::at_most("", classical::newton_check(PotentialSpec::harmonic(1.0), p, 1.0, 0.0, T, T / 2000).max_residual,
                                1e-3);
  });
  add("classical-limit", "velocity-identity", [&](bool) {
    const auto s = classical::asymptotic_state(classical::QmuplParams::natural(), 0.3, 0.4);
    return CheckResult::at_most("", classical::bohmian_velocity_identity(s, Grid1D::centered(10.0, 512)).error(), 1e-8);
  });

  // cli-harness
  add("cli-harness", "config-roundtrip", [&](bool) {
    bool ok = true;
    for (const auto& name : scenario_names()) {
      auto c = ScenarioConfig::defaults(name);
      c.seed = seed;
      std::ostringstream first;
      c.write(first);
      std::istringstream in(first.str());
      auto back = ScenarioConfig::defaults(name);
      back.apply(parse_config(in));
      std::ostringstream second;
      back.write(second);
      ok = ok && first.str() == second.str();
    }
    return CheckResult::holds("", ok);
  });
  add("cli-harness", "determinism", [&](bool) {
    const Grid1D g = Grid1D::centered(20.0, 256);
    const auto psi = detail::lobes(g, 6.0, 0.7);
    std::ostringstream a, b;
    bath::localization_center_statistics(psi, 0.8, 2000, seed).histogram.write(a);
    bath::localization_center_statistics(psi, 0.8, 2000, seed).histogram.write(b);
    std::ostringstream la, lb;
    bath::write_collision_log(la, bath::multi_collision_run(psi, PotentialSpec::free(), {0.8, 0.0, 3.0}, 1.0, seed, 1).collisions);
    bath::write_collision_log(lb, bath::multi_collision_run(psi, PotentialSpec::free(), {0.8, 0.0, 3.0}, 1.0, seed, 1).collisions);
    return CheckResult::holds("", a.str() == b.str() && la.str() == lb.str());
  });
  return rep;
}

}  // namespace bohmgrw::harness
