// Acceptance run: one line per criterion with its measured values, runtime
// and verdict. Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
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
#include "bohmgrw/grw/collapse.hpp"
#include "bohmgrw/grw/master_equation.hpp"
#include "bohmgrw/harness/scenarios.hpp"
#include "bohmgrw/parallel.hpp"

using namespace bohmgrw;

namespace {

constexpr std::uint64_t seed = 20240611;
const UnitsContext nat = UnitsContext::natural();

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ComplexField1D two_lobes(const Grid1D& g, double sep, double width) {
  const auto l = gaussian_packet(g, -sep / 2, width), r = gaussian_packet(g, sep / 2, width);
  ComplexField1D psi(g);
  for (std::size_t i = 0; i < g.size(); ++i) psi[i] = l[i] + r[i];
  psi.normalize();
  return psi;
}

double rel(double v, double ref) { return std::abs(v / ref - 1.0); }

Outcome estimates() {
  const auto e = bath::environment_estimates({4.7e-26, 298.0, 101325.0, 1e-3});
  const bool ok = rel(e.lambda_th, 3.0e-12) <= 0.02 && rel(e.n, 2.46e25) <= 0.01 && rel(e.v_bar, 472.0) <= 0.01 &&
                  rel(e.eta, 3.6e22) <= 0.03;
  return {ok, "lambda_th=" + fmt("%.3g", e.lambda_th) + " n=" + fmt("%.3g", e.n) + " v=" + fmt("%.4g", e.v_bar) +
                  " eta=" + fmt("%.3g", e.eta)};
}

Outcome regime() {
  const auto p = classical::QmuplParams::atmosphere_sphere();
  const double tC = classical::collapse_time(1e-3, p), tcl = classical::classical_time(1e-3, p) / 60.0;
  const double dq = classical::delta_q(p);
  const bool ok = tC >= 5e-40 && tC <= 1e-39 && tcl >= 40.0 && tcl <= 50.0 && dq / 1e-14 <= 3.0 && 1e-14 / dq <= 3.0;
  return {ok, "t_C=" + fmt("%.3g", tC) + " s t_cl=" + fmt("%.3g", tcl) + " min dq=" + fmt("%.3g", dq) + " m"};
}

Outcome equivariance() {
  const Grid1D g = Grid1D::centered(40.0, 1024);
  const auto free = bohm::verify_equivariance(gaussian_packet(g, -4.0, 1.0, 1.0), PotentialSpec::free(), nat, 10000,
                                              {1.0, 2.0, 4.0}, 1e-2, seed);
  const auto pair = bohm::verify_equivariance(counter_propagating_pair(g, 5.0, 1.0, 2.0), PotentialSpec::free(), nat,
                                              10000, {1.0, 2.5, 5.0}, 1e-2, seed + 1);
  double worst = 0.0;
  bool ok = free.checks.size() == 3 && pair.checks.size() == 3;
  for (const auto* r : {&free, &pair})
    for (const auto& c : r->checks) {
      worst = std::max(worst, c.ks.statistic);
      ok = ok && c.ks.statistic < 0.0163;
    }
  return {ok, "worst KS=" + fmt("%.4f", worst) + " (limit 0.0163, 6 checks)"};
}

Outcome z_statistics() {
  const Grid1D g = Grid1D::centered(40.0, 1024);
  auto psi = counter_propagating_pair(g, 5.0, 1.0, 2.0);
  psi = split_step_propagate(psi, PotentialSpec::free(), nat, 1e-2, 250);
  const double sigma = 0.5;
  const std::size_t n = 10000;
  const auto stats = bath::localization_center_statistics(psi, sigma, n, seed);
  // Oracle: |psi|^2 on the grid convolved with the bath law N(0, sigma^2).
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) w[i] = std::norm(psi[i]) * g.dx();
  auto cdf = [&](double z) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += w[i] * 0.5 * std::erfc(-(z - g.x(i)) / (sigma * std::sqrt(2.0)));
    return s;
  };
  const double ks = ks_statistic(stats.z, cdf);
  return {ks < ks_critical(n, ks_c99) && stats.ks.pass(),
          "KS vs convolution=" + fmt("%.4f", ks) + " KS vs GRW law=" + fmt("%.4f", stats.ks.statistic) +
              " (limit " + fmt("%.4f", ks_critical(n)) + ")"};
}

Outcome conditional_closed_form() {
  const Grid1D gx = Grid1D::centered(8.0, 512), gy = Grid1D::centered(12.0, 512);
  const double sigma = 0.7;
  const auto psi_S = two_lobes(gx, 4.0, 0.6);
  const auto env = ComplexField1D::from_function(gy, [&](double y) { return cplx(bath::bath_amplitude(y, sigma)); });
  const auto joint = JointField2D::product(psi_S, env);
  const bath::InteractionWindow w{0.0, 1.0};
  double worst = 0.0;
  for (auto [X0, Y0] : {std::pair{-1.8, 0.45}, std::pair{2.1, -0.9}, std::pair{0.3, 1.2}})
    for (double t : {0.25, 0.5, 1.0}) {
      const auto [X, Y] = bath::collision_trajectories(X0, Y0, w, t);
      const auto numeric = bohm::conditional_wavefunction(bath::shear_evolution(joint, w, t), Y);
      // Analytic product psi_S(x) exp(-(Y - g x)^2 / 4 sigma^2), normalized.
      ComplexField1D closed(gx);
      for (std::size_t i = 0; i < gx.size(); ++i) {
        const double d = Y - t * gx.x(i);
        closed[i] = psi_S[i] * std::exp(-d * d / (4.0 * sigma * sigma));
      }
      closed.normalize();
      worst = std::max(worst, sup_distance(numeric.field, closed));
    }
  return {worst < 1e-6, "sup-norm=" + fmt("%.3g", worst) + " on 512x512"};
}

Outcome grw_unraveling() {
  const Grid1D g = Grid1D::centered(12.8, 128);
  const auto psi0 = two_lobes(g, 6.0, 0.7);
  const grw::GrwParams p{1.0, 2.0, 1};
  const std::size_t runs = 10000;
  const double T = 1.0;
  grw::GrwOptions o;
  o.max_dt = 1e-3;
  const auto mc = grw::grw_ensemble_density(psi0, PotentialSpec::free(), p, T, runs, seed, {T}, o);
  const auto me = grw::master_equation_evolve(bohm::DensityMatrix1D::pure(psi0), PotentialSpec::free(), p, T);
  const double dev = mc[0].max_deviation(me);

  // Decay of the coherence between x = -3 and x = +3 with the kinetic term
  // frozen (mass 1e12), fitted as exp(-Gamma t) through the origin.
  grw::GrwOptions heavy = o;
  heavy.units = {1.0, 1e12, UnitMode::natural};
  std::vector<double> times;
  for (int k = 1; k <= 10; ++k) times.push_back(0.1 * k);
  const auto snaps = grw::grw_ensemble_density(psi0, PotentialSpec::free(), p, T, runs, seed + 1, times, heavy);
  const auto i = static_cast<Eigen::Index>(std::lround((-3.0 - g.x_min()) / g.dx()));
  const auto j = static_cast<Eigen::Index>(std::lround((3.0 - g.x_min()) / g.dx()));
  const double dx = g.x(static_cast<std::size_t>(j)) - g.x(static_cast<std::size_t>(i));
  double stl = 0.0, stt = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double r = std::abs(snaps[k].values(i, j)) / std::abs(psi0[static_cast<std::size_t>(i)] *
                                                                std::conj(psi0[static_cast<std::size_t>(j)]));
    stl += times[k] * std::log(r);
    stt += times[k] * times[k];
  }
  const double gamma = -stl / stt;
  const double expected = p.lambda * (1.0 - std::exp(-dx * dx / (4.0 * p.r_C * p.r_C)));
  return {dev < 0.05 && rel(gamma, expected) <= 0.05,
          "max |rho_MC - rho_ME|=" + fmt("%.4f", dev) + " decay fit=" + fmt("%.4f", gamma) +
              " expected=" + fmt("%.4f", expected) + " (" + fmt("%.2f", 100 * rel(gamma, expected)) + "%)"};
}

Outcome bath_grw() {
  const Grid1D g = Grid1D::centered(16.0, 256);
  const auto psi0 = two_lobes(g, 6.0, 0.7);
  const double sigma = 0.8, mu = 2.0, T = 1.0;
  const std::size_t runs = 1000;
  std::vector<double> bath_x(runs), grw_x(runs);
  bath::MultiCollisionOptions mopts;
  mopts.record_path = false;
  parallel_for(runs, [&](std::size_t r) {
    bath_x[r] = bath::multi_collision_run(psi0, PotentialSpec::free(), {sigma, 0.0, mu}, T, seed, r, mopts).X;
    const auto run = grw::evolve_grw(psi0, PotentialSpec::free(), {mu, std::sqrt(2.0) * sigma, 1}, T,
                                     grw::GrwStreams::for_run(seed + 7, r));
    auto readout = make_rng(seed + 7, streams::readout, r);
    grw_x[r] = DiscreteCdf(probability_density(run.psi)).quantile(readout.uniform());
  });
  const double ks = ks_two_sample(bath_x, grw_x), crit = ks_critical_two_sample(runs, runs, ks_c95);
  return {ks < crit, "two-sample KS=" + fmt("%.4f", ks) + " (limit " + fmt("%.4f", crit) + ", 1000 runs each)"};
}

Outcome amplification() {
  const auto r = com::measure_amplification({1, 2, 4, 8}, 1.0, 400, seed);
  std::string rates;
  for (const auto& row : r.rows) rates += fmt("%.3f", row.fitted_rate) + (&row == &r.rows.back() ? "" : ",");
  return {std::abs(r.slope - 1.0) <= 0.1, "slope=" + fmt("%.4f", r.slope) + " rates=" + rates};
}

Outcome classicalization() {
  const Grid1D g = Grid1D::centered(40.0, 1024);
  const auto psi0 = counter_propagating_pair(g, 5.0, 1.0, 2.0);
  bath::MultiCollisionOptions opts;
  opts.start = -5.0;
  const auto isolated = bath::multi_collision_run(psi0, PotentialSpec::free(), {4.0, 0.0, 0.0}, 5.0, seed, 0, opts);
  const auto bathed = bath::multi_collision_run(psi0, PotentialSpec::free(), {4.0, 0.0, 20.0}, 5.0, seed, 0, opts);
  auto crosses = [](const std::vector<std::pair<double, double>>& path) {
    return std::any_of(path.begin(), path.end(), [](const auto& p) { return p.second > 0.0; });
  };
  double peak = -1e300;
  for (const auto& [t, x] : isolated.path) peak = std::max(peak, x);
  const bool bounce = !crosses(isolated.path) && isolated.path.back().second < peak - 1.0;
  const bool cross = crosses(bathed.path);
  return {bounce && cross, std::string("isolated bounces=") + (bounce ? "yes" : "no") + " (max X=" +
                               fmt("%.3f", peak) + ") bathed crosses=" + (cross ? "yes" : "no") +
                               " (final X=" + fmt("%.3f", bathed.X) + ")"};
}

Outcome newton() {
  const auto nat_p = classical::QmuplParams::natural();
  const double period = 2.0 * std::numbers::pi;
  const auto n = classical::newton_check(PotentialSpec::harmonic(1.0), nat_p, 1.0, 0.0, period, period / 2000);

  const auto p = classical::QmuplParams::atmosphere_sphere();
  const std::size_t paths = 1000;
  const double T = 1.0;
  std::vector<double> xs(paths), vs(paths);
  parallel_for(paths, [&](std::size_t i) {
    const auto path = classical::sde_evolve(classical::asymptotic_state(p, 0.0, 0.0), PotentialSpec::free(), T, T / 1000,
                                            seed, true, i);
    xs[i] = path.x_bar.back();
    vs[i] = path.v_bar.back();
  });
  double sx = 0, sv = 0;
  for (std::size_t i = 0; i < paths; ++i) {
    sx += xs[i] * xs[i];
    sv += vs[i] * vs[i];
  }
  const double rx = std::sqrt(sx / paths), rv = std::sqrt(sv / paths);
  // sqrt(t) predictions from the constants: sqrt(hbar t / M) and sqrt(Lambda t) hbar / M.
  const double hbar = 1.054571817e-34, M = 1e-3, Lambda = 3.6e22;
  const double px = std::sqrt(hbar * T / M), pv = std::sqrt(Lambda * T) * hbar / M;
  auto within2 = [](double a, double b) { return a / b <= 2.0 && b / a <= 2.0; };
  return {n.max_residual < 1e-3 && within2(rx, px) && within2(rv, pv),
          "residual=" + fmt("%.3g", n.max_residual) + " rms_x/pred=" + fmt("%.3f", rx / px) +
              " rms_v/pred=" + fmt("%.3f", rv / pv)};
}

Outcome properties() {
  std::vector<std::string> failed;
  std::ostringstream d;

  // No-crossing and permutation invariance through the interference region.
  {
    const Grid1D g = Grid1D::centered(40.0, 1024);
    const auto psi = counter_propagating_pair(g, 5.0, 1.0, 2.0);
    auto ens = bohm::equilibrium_ensemble(psi, 1000, seed);
    const auto start = ens.positions;
    bool ordered = true;
    auto fwd = bohm::evolve_guided(psi, ens, PotentialSpec::free(), nat, 5e-3, 1000, {},
                                   [&](const ComplexField1D&, const bohm::TrajectoryEnsemble& e) {
                                     ordered = ordered && bohm::order_preserved(start, e.positions);
                                   });
    std::vector<std::size_t> perm(ens.size());
    for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = (k * 7919) % perm.size();
    auto shuffled = ens;
    for (std::size_t k = 0; k < perm.size(); ++k) shuffled.positions[k] = ens.positions[perm[k]];
    const auto back = bohm::evolve_guided(psi, shuffled, PotentialSpec::free(), nat, 5e-3, 1000).ensemble.positions;
    double worst = 0.0;
    for (std::size_t k = 0; k < perm.size(); ++k)
      worst = std::max(worst, std::abs(back[k] - fwd.ensemble.positions[perm[k]]));
    if (!ordered) failed.push_back("no-crossing");
    if (worst > 0.0) failed.push_back("permutation");
    d << "perm=" << fmt("%.1g", worst) << " ";
  }
  // Norm conservation over 2000 steps and through GRW collapses.
  {
    const Grid1D g = Grid1D::centered(20.0, 512);
    const auto psi = split_step_propagate(gaussian_packet(g, -3.0, 1.0, 1.0), PotentialSpec::harmonic(1.0), nat, 5e-3, 2000);
    double drift = std::abs(psi.norm_squared() - 1.0);
    grw::GrwOptions o;
    o.on_collapse = [&](const ComplexField1D& f, const grw::CollapseEvent&) {
      drift = std::max(drift, std::abs(f.norm_squared() - 1.0));
    };
    (void)grw::evolve_grw(two_lobes(g, 6.0, 0.7), PotentialSpec::free(), {5.0, 1.0, 1}, 2.0,
                          grw::GrwStreams::for_run(seed, 0), o);
    if (!(drift < 1e-8)) failed.push_back("norm");
    d << "norm=" << fmt("%.1g", drift) << " ";
  }
  // dq dp = hbar / sqrt(2) from the formulas and from the rendered packet.
  {
    const auto p = classical::QmuplParams::natural();
    const auto s = classical::asymptotic_state(p, 0.5, 0.3);
    const auto sp = spreads(classical::render(s, Grid1D::centered(20.0, 2048)), p.hbar);
    double worst = std::abs(classical::delta_q(p) * classical::delta_p(p) - p.hbar / std::sqrt(2.0));
    const auto sphere = classical::QmuplParams::atmosphere_sphere();
    worst = std::max(worst, rel(classical::delta_q(sphere) * classical::delta_p(sphere), sphere.hbar / std::sqrt(2.0)));
    worst = std::max(worst, std::abs(sp.dq * sp.dp - p.hbar / std::sqrt(2.0)));
    if (!(worst < 1e-10)) failed.push_back("uncertainty");
    d << "dqdp=" << fmt("%.1g", worst) << " ";
  }
  // Collision outcomes do not depend on the bath packet centres a_j.
  {
    const Grid1D g = Grid1D::centered(20.0, 256);
    const auto psi0 = two_lobes(g, 6.0, 0.7);
    bath::MultiCollisionOptions a, b;
    b.center_spread = 25.0;
    const auto ra = bath::multi_collision_run(psi0, PotentialSpec::free(), {0.8, 0.0, 4.0}, 1.5, seed, 5, a);
    const auto rb = bath::multi_collision_run(psi0, PotentialSpec::free(), {0.8, 0.0, 4.0}, 1.5, seed, 5, b);
    const double diff = std::max(sup_distance(ra.psi, rb.psi), std::abs(ra.X - rb.X));
    if (!(diff < 1e-10) || ra.collisions.empty()) failed.push_back("centres");
    d << "centres=" << fmt("%.1g", diff) << " ";
  }
  // Same config and seed: hash-equal scenario outputs.
  {
    const auto root = std::filesystem::temp_directory_path() / ("bohmgrw_acceptance_" + std::to_string(seed));
    bool same = true;
    for (const char* name : {"z-statistics", "com-amplification", "single-collision"}) {
      auto cfg = harness::ScenarioConfig::defaults(name);
      cfg.seed = seed;
      if (cfg.scenario == "com-amplification") cfg.set("run.runs", "100");
      const auto a = harness::run_scenario(cfg, root / "a");
      const auto b = harness::run_scenario(cfg, root / "b");
      same = same && a.outputs == b.outputs && !a.outputs.empty();
    }
    std::filesystem::remove_all(root);
    if (!same) failed.push_back("determinism");
    d << "hashes=" << (same ? "equal" : "differ");
  }
  std::string f;
  for (const auto& s : failed) f += " " + s;
  return {failed.empty(), d.str() + (failed.empty() ? "" : " failed:" + f)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "estimates reproduction", 1e-3, estimates},
      {2, "regime timescales", 1e-3, regime},
      {3, "equivariance", 60.0, equivariance},
      {4, "z-statistics equivalence", 30.0, z_statistics},
      {5, "conditional closed form", 10.0, conditional_closed_form},
      {6, "GRW unraveling", 300.0, grw_unraveling},
      {7, "bath-GRW equivalence", 300.0, bath_grw},
      {8, "amplification", 60.0, amplification},
      {9, "classicalization", 60.0, classicalization},
      {10, "Newton recovery", 120.0, newton},
      {11, "property suites", 600.0, properties},
  };
  std::vector<int> only;
  for (int a = 1; a < argc; ++a) only.push_back(std::atoi(argv[a]));
  int failures = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("[%s] %2d %-26s %s | %.3g s (budget %g s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.budget_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
