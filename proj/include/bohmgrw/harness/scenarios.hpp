#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "bohmgrw/bath/collision.hpp"
#include "bohmgrw/bath/estimates.hpp"
#include "bohmgrw/bath/multi_collision.hpp"
#include "bohmgrw/bohm/conditional.hpp"
#include "bohmgrw/classical/qmupl.hpp"
#include "bohmgrw/classical/sde.hpp"
#include "bohmgrw/com/amplification.hpp"
#include "bohmgrw/csv.hpp"
#include "bohmgrw/grw/collapse.hpp"
#include "bohmgrw/harness/config.hpp"
#include "bohmgrw/harness/report.hpp"
#include "bohmgrw/harness/verify.hpp"
#include "bohmgrw/parallel.hpp"
#include "bohmgrw/propagate.hpp"
#include "bohmgrw/sampling.hpp"

namespace bohmgrw::harness {

struct ScenarioResult {
  std::vector<CheckResult> checks;
  std::vector<std::string> warnings;
};

namespace detail {

inline Grid1D grid_from(const ScenarioConfig& c, const std::string& half = "grid.half_width",
                        const std::string& points = "grid.points") {
  return Grid1D::centered(c.real(half), c.count(points));
}

inline ComplexField1D two_lobes(const Grid1D& g, double separation, double width) {
  const auto l = gaussian_packet(g, -separation / 2, width), r = gaussian_packet(g, separation / 2, width);
  ComplexField1D psi(g);
  for (std::size_t i = 0; i < g.size(); ++i) psi[i] = l[i] + r[i];
  psi.normalize();
  return psi;
}

inline void plot_header(std::ostream& gp, const std::string& png) {
  gp << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set terminal png size 900,600\n"
     << "set output '" << png << "'\n";
}

}  // namespace detail

/// Counter-propagating packets; the tracked particle bounces off the
/// midpoint unless bath collisions keep its conditional wave function local.
inline ScenarioResult interference_bounce(const ScenarioConfig& c, Artifacts& out) {
  const auto g = detail::grid_from(c);
  const auto psi0 = counter_propagating_pair(g, c.real("packet.mu"), c.real("packet.sigma"), c.real("packet.velocity"));
  const bool bath_on = c.flag("bath.enabled");
  const bath::BathParticleSpec bath{c.real("bath.sigma"), 0.0, bath_on ? c.real("bath.rate") : 0.0};
  const double T = c.real("run.T");
  bath::MultiCollisionOptions opts;
  opts.max_dt = c.real("run.max_dt");
  opts.start = c.real("run.start");
  const auto [steps, dt] = grw::grw_stepping(T, bath.rate, opts.max_dt);
  const auto snaps = std::max<std::size_t>(2, c.count("run.snapshots"));
  opts.timeline_every = std::max(1L, steps / static_cast<long>(snaps - 1));
  const auto run = bath::multi_collision_run(psi0, PotentialSpec::free(), bath, T, c.seed, 0, opts);

  const double x0 = run.path.front().second;
  const double side = x0 < 0.0 ? -1.0 : 1.0;
  bool crossed = false, reversed = false;
  double first_dir = 0.0;
  for (std::size_t n = 1; n < run.path.size(); ++n) {
    if (side * run.path[n].second < 0.0) crossed = true;
    const double step = run.path[n].second - run.path[n - 1].second;
    if (std::abs(step) < 1e-12) continue;
    if (first_dir == 0.0) first_dir = step > 0 ? 1.0 : -1.0;
    else if (step * first_dir < 0.0) reversed = true;
  }

  {
    auto f = out.open("trajectory.csv");
    csv::Writer w(f, {"t", "X"});
    const std::size_t every = std::max<std::size_t>(1, run.path.size() / 2000);
    for (std::size_t n = 0; n < run.path.size(); n += every) w.row({run.path[n].first, run.path[n].second});
    if ((run.path.size() - 1) % every != 0) w.row({run.path.back().first, run.path.back().second});
  }
  {
    auto f = out.open("density.csv");
    csv::Writer w(f, {"t", "x", "density"});
    for (const auto& s : run.timeline)
      for (std::size_t i = 0; i < g.size(); ++i) w.row({s.time, g.x(i), std::norm(s.field[i])});
  }
  if (bath_on) {
    auto f = out.open("collisions.csv");
    bath::write_collision_log(f, run.collisions);
  }
  {
    auto gp = out.open("plot.gp");
    detail::plot_header(gp, "trajectory.png");
    gp << "set xlabel 't'\nset ylabel 'X'\n"
       << "plot 'trajectory.csv' using 1:2 with lines title 'Bohmian trajectory', 0 with lines dt 2 title 'midpoint'\n"
       << "set output 'density.png'\nset xlabel 'x'\nset ylabel 'density'\n"
       << "plot 'density.csv' using 2:3:1 with lines palette title '|psi|^2 snapshots'\n";
  }

  ScenarioResult r;
  if (bath_on) {
    r.checks.push_back(CheckResult::holds("crosses-midpoint", crossed));
  } else {
    r.checks.push_back(CheckResult::holds("no-crossing", !crossed));
    r.checks.push_back(CheckResult::holds("velocity-reversal", reversed));
  }
  return r;
}

/// Instantaneous-window collision: numerical shear of the joint wave
/// function against the closed-form conditional wave functions.
inline ScenarioResult single_collision(const ScenarioConfig& c, Artifacts& out) {
  const auto gx = detail::grid_from(c, "grid.x_half_width", "grid.x_points");
  const auto gy = detail::grid_from(c, "grid.y_half_width", "grid.y_points");
  const double sigma = c.real("bath.sigma");
  const auto psi_S = detail::two_lobes(gx, c.real("system.separation"), c.real("system.width"));
  const auto env = ComplexField1D::from_function(gy, [&](double y) { return cplx(bath::bath_amplitude(y, sigma)); });
  const auto joint = JointField2D::product(psi_S, env);
  const bath::InteractionWindow w{c.real("window.t_i"), c.real("window.t_f")};
  w.validate();

  auto rx = make_rng(c.seed, streams::initial_positions);
  auto ry = make_rng(c.seed, streams::bath_y0);
  const double X0 = DiscreteCdf(probability_density(psi_S)).quantile(rx.uniform());
  const double Y0 = sigma * ry.normal();

  const auto samples = c.count("run.samples");
  double worst = 0.0;
  auto dev = out.open("deviations.csv");
  csv::Writer dw(dev, {"t", "X", "Y", "sup_norm"});
  for (std::size_t k = 1; k <= samples; ++k) {
    const double t = w.t_i + (w.t_f - w.t_i) * static_cast<double>(k) / static_cast<double>(samples);
    const auto sheared = bath::shear_evolution(joint, w, t);
    const auto [X, Y] = bath::collision_trajectories(X0, Y0, w, t);
    const auto numeric = bohm::conditional_wavefunction(sheared, Y);
    const auto closed = bath::conditional_pair(psi_S, gy, sigma, X0, Y0, w, t);
    const double d = sup_distance(numeric.field, closed.system.field);
    worst = std::max(worst, d);
    dw.row({t, X, Y, d});
    if (k == samples) {
      auto f = out.open("conditional_system.csv");
      csv::Writer sw(f, {"x", "numeric_re", "numeric_im", "closed_re", "closed_im"});
      for (std::size_t i = 0; i < gx.size(); ++i)
        sw.row({gx.x(i), numeric.field[i].real(), numeric.field[i].imag(), closed.system.field[i].real(),
                closed.system.field[i].imag()});
      auto b = out.open("conditional_bath.csv");
      csv::write_field(b, closed.bath.field);
    }
  }
  {
    auto gp = out.open("plot.gp");
    detail::plot_header(gp, "conditional_system.png");
    gp << "set xlabel 'x'\n"
       << "plot 'conditional_system.csv' using 1:2 with lines title 'sheared slice (re)', "
          "'' using 1:4 with points pt 7 ps 0.3 title 'closed form (re)'\n"
       << "set output 'conditional_bath.png'\nset xlabel 'y'\n"
       << "plot 'conditional_bath.csv' using 1:4 with lines title 'bath conditional density'\n";
  }
  return {{CheckResult::at_most("closed-form", worst, c.real("check.tolerance"))}, {}};
}

/// Localization centres X0 + Y0 of one collision on an interfering pair,
/// against the GRW collapse-centre law with r_C = sqrt(2) sigma.
inline ScenarioResult z_statistics(const ScenarioConfig& c, Artifacts& out) {
  const auto g = detail::grid_from(c);
  auto psi = counter_propagating_pair(g, c.real("packet.mu"), c.real("packet.sigma"), c.real("packet.velocity"));
  const double t = c.real("packet.evolve");
  if (t > 0.0) {
    const auto steps = std::max(1L, std::lround(std::ceil(t / 1e-2)));
    psi = split_step_propagate(psi, PotentialSpec::free(), UnitsContext::natural(), t / static_cast<double>(steps), steps);
  }
  const double sigma = c.real("bath.sigma");
  const auto stats = bath::localization_center_statistics(psi, sigma, c.count("run.samples"), c.seed, c.count("run.bins"));
  {
    auto f = out.open("histogram.csv");
    stats.histogram.write(f);
  }
  {
    const auto law = grw::collapse_center_pdf(psi, std::sqrt(2.0) * sigma);
    auto f = out.open("grw_law.csv");
    csv::Writer w(f, {"z", "density"});
    for (std::size_t i = 0; i < g.size(); ++i) w.row({g.x(i), law.values[i]});
  }
  {
    auto f = out.open("ks.txt");
    f << "statistic = " << csv::format(stats.ks.statistic) << "\ncritical = " << csv::format(stats.ks.critical)
      << "\nn = " << stats.ks.n << "\n";
  }
  {
    auto gp = out.open("plot.gp");
    detail::plot_header(gp, "z_statistics.png");
    gp << "set xlabel 'z'\nset ylabel 'density'\n"
       << "plot 'histogram.csv' using 1:3 with boxes title 'X0 + Y0', 'grw_law.csv' using 1:2 with lines lw 2 "
          "title 'collapse-centre law'\n";
  }
  return {{CheckResult::at_most("ks-99", stats.ks.statistic, stats.ks.critical)}, {}};
}

/// Final Bohmian positions under bath collisions against Born-rule readouts
/// of GRW realizations with lambda = rate and r_C = sqrt(2) sigma.
inline ScenarioResult grw_vs_bath(const ScenarioConfig& c, Artifacts& out) {
  const auto g = detail::grid_from(c);
  const auto psi0 = detail::two_lobes(g, c.real("system.separation"), c.real("system.width"));
  const double sigma = c.real("bath.sigma"), mu = c.real("bath.rate"), T = c.real("run.T");
  const auto runs = c.count("run.runs");
  bath::MultiCollisionOptions mopts;
  mopts.max_dt = c.real("run.max_dt");
  mopts.record_path = false;
  grw::GrwOptions gopts;
  gopts.max_dt = mopts.max_dt;
  const grw::GrwParams params{mu, std::sqrt(2.0) * sigma, 1.0};
  // The GRW side uses an independent seed so the two ensembles share no draws.
  const std::uint64_t grw_seed = c.seed ^ 0x9e3779b97f4a7c15ull;
  std::vector<double> bath_x(runs), grw_x(runs);
  parallel_for(runs, [&](std::size_t r) {
    bath_x[r] = bath::multi_collision_run(psi0, PotentialSpec::free(), {sigma, 0.0, mu}, T, c.seed, r, mopts).X;
    const auto run = grw::evolve_grw(psi0, PotentialSpec::free(), params, T, grw::GrwStreams::for_run(grw_seed, r), gopts);
    auto readout = make_rng(grw_seed, streams::readout, r);
    grw_x[r] = DiscreteCdf(probability_density(run.psi)).quantile(readout.uniform());
  });
  {
    auto f = out.open("positions.csv");
    csv::Writer w(f, {"run", "bath_X", "grw_X"});
    for (std::size_t r = 0; r < runs; ++r) w.row({static_cast<long long>(r), bath_x[r], grw_x[r]});
  }
  const double ks = ks_two_sample(bath_x, grw_x), crit = ks_critical_two_sample(runs, runs, ks_c95);
  {
    auto gp = out.open("plot.gp");
    detail::plot_header(gp, "final_positions.png");
    gp << "set xlabel 'final position'\nset ylabel 'empirical CDF'\n"
       << "plot 'positions.csv' using 2:(1.0) smooth cnormal title 'bath collisions', "
          "'' using 3:(1.0) smooth cnormal title 'GRW'\n";
  }
  return {{CheckResult::at_most("ks-95", ks, crit)}, {}};
}

inline ScenarioResult com_amplification(const ScenarioConfig& c, Artifacts& out) {
  std::vector<std::size_t> Ns;
  for (auto n : c.integers("run.particles")) {
    require(n >= 1, Errc::config_parse, "run.particles entries must be positive");
    Ns.push_back(static_cast<std::size_t>(n));
  }
  com::AmplificationOptions opts;
  opts.T = c.real("run.T");
  opts.sigma = c.real("bath.sigma");
  opts.spacing = c.real("cluster.spacing");
  opts.relative_width = c.real("cluster.relative_width");
  opts.com_width = c.real("cluster.com_width");
  const double lambda = c.real("run.lambda");
  const auto rep = com::measure_amplification(Ns, lambda, c.count("run.runs"), c.seed, opts);
  {
    auto f = out.open("rates.csv");
    rep.write(f);
  }
  {
    auto f = out.open("fit.txt");
    f << "slope = " << csv::format(rep.slope) << "\nslope_stderr = " << csv::format(rep.slope_stderr)
      << "\nintercept = " << csv::format(rep.intercept) << "\n";
  }
  {
    auto gp = out.open("plot.gp");
    detail::plot_header(gp, "amplification.png");
    gp << "set xlabel 'N'\nset ylabel 'centre-of-mass localization rate'\n"
       << "plot 'rates.csv' using 1:2:3 with yerrorbars title 'measured', " << csv::format(rep.slope) << "*x + "
       << csv::format(rep.intercept) << " title 'fit', " << csv::format(lambda) << "*x dt 2 title 'N lambda'\n";
  }
  return {{CheckResult::at_most("slope", std::abs(rep.slope / lambda - 1.0), 0.1)}, {}};
}

/// Deterministic harmonic mean path against Newton's law, and the spread of
/// stochastic mean paths for a macroscopic sphere against sqrt(t) laws.
inline ScenarioResult classical_trajectory(const ScenarioConfig& c, Artifacts& out) {
  ScenarioResult r;
  const double w = c.real("newton.omega");
  const auto nat = classical::QmuplParams::natural();
  const double period = 2.0 * std::numbers::pi / w;
  const auto newton = classical::newton_check(PotentialSpec::harmonic(nat.M * w * w), nat, c.real("newton.x0"),
                                              c.real("newton.v0"), period, period / static_cast<double>(c.count("newton.steps")));
  {
    auto f = out.open("newton_path.csv");
    newton.path.write(f);
  }
  r.checks.push_back(CheckResult::at_most("newton-residual", newton.max_residual, c.real("newton.tolerance")));

  classical::QmuplParams p{c.real("sphere.Lambda"), c.real("sphere.r_C"), c.real("sphere.mass"), si::hbar,
                           classical::LambdaConvention::rate};
  p.validate();
  {
    auto f = out.open("regime.txt");
    classical::regime_report(p).write(f);
  }
  const double T = c.real("sphere.T");
  const auto steps = c.count("sphere.steps");
  const auto paths = c.count("sphere.paths");
  const auto s0 = classical::asymptotic_state(p, 0.0, 0.0);
  const std::size_t samples = 10;
  std::vector<std::vector<double>> xs(paths), vs(paths);
  std::vector<classical::SdePath> shown(std::min<std::size_t>(paths, 5));
  std::vector<std::size_t> at(samples);
  for (std::size_t k = 0; k < samples; ++k) at[k] = (k + 1) * steps / samples;
  parallel_for(paths, [&](std::size_t i) {
    auto path = classical::sde_evolve(s0, PotentialSpec::free(), T, T / static_cast<double>(steps), c.seed, true, i);
    for (auto n : at) {
      xs[i].push_back(path.x_bar[n]);
      vs[i].push_back(path.v_bar[n]);
    }
    if (i < shown.size()) shown[i] = std::move(path);
  });
  double worst = 1.0;
  {
    auto f = out.open("fluctuations.csv");
    csv::Writer fw(f, {"t", "rms_x", "predicted_x", "rms_v", "predicted_v"});
    for (std::size_t k = 0; k < samples; ++k) {
      double sx = 0, sv = 0;
      for (std::size_t i = 0; i < paths; ++i) {
        sx += xs[i][k] * xs[i][k];
        sv += vs[i][k] * vs[i][k];
      }
      const double t = T * static_cast<double>(at[k]) / static_cast<double>(steps);
      const double rx = std::sqrt(sx / static_cast<double>(paths)), rv = std::sqrt(sv / static_cast<double>(paths));
      const double px = classical::position_noise(p) * std::sqrt(t), pv = classical::velocity_noise(p) * std::sqrt(t);
      fw.row({t, rx, px, rv, pv});
      for (double ratio : {rx / px, rv / pv}) worst = std::max({worst, ratio, 1.0 / ratio});
    }
  }
  {
    auto f = out.open("sample_paths.csv");
    csv::Writer pw(f, {"path", "t", "x_bar", "v_bar", "W"});
    for (std::size_t i = 0; i < shown.size(); ++i)
      for (std::size_t n = 0; n < shown[i].t.size(); n += std::max<std::size_t>(1, steps / 200))
        pw.row({static_cast<long long>(i), shown[i].t[n], shown[i].x_bar[n], shown[i].v_bar[n], shown[i].W[n]});
  }
  {
    auto gp = out.open("plot.gp");
    detail::plot_header(gp, "newton.png");
    gp << "set xlabel 't'\nset ylabel 'x_bar'\n"
       << "plot 'newton_path.csv' using 1:2 with lines title 'mean path'\n"
       << "set output 'fluctuations.png'\nset logscale xy\nset ylabel 'RMS velocity fluctuation'\n"
       << "plot 'fluctuations.csv' using 1:4 with points title 'measured', '' using 1:5 with lines title "
          "'sqrt(Lambda t) hbar/M'\n";
  }
  r.checks.push_back(CheckResult::at_most("fluctuation-scaling", worst, c.real("sphere.factor")));
  if (!newton.path.warnings.empty()) r.warnings = newton.path.warnings;
  return r;
}

inline bool atmosphere_defaults(const ScenarioConfig& c) {
  return c.text("gas.name") == "n2" && c.real("gas.temperature") == 298.0 && c.real("gas.pressure") == 101325.0 &&
         c.real("system.radius") == 1e-3;
}

inline ScenarioResult estimates(const ScenarioConfig& c, Artifacts& out) {
  const auto e = bath::environment_estimates(
      {bath::gas_mass(c.text("gas.name")), c.real("gas.temperature"), c.real("gas.pressure"), c.real("system.radius")});
  {
    auto f = out.open("estimates.txt");
    e.write(f);
  }
  ScenarioResult r;
  bool finite = true;
  for (double v : {e.lambda_th, e.n, e.v_bar, e.sigma_cs, e.eta, e.r_C_eff, e.lambda_eff})
    finite = finite && std::isfinite(v) && v > 0.0;
  r.checks.push_back(CheckResult::holds("finite", finite));
  if (atmosphere_defaults(c)) {
    auto rel = [](double v, double ref) { return std::abs(v / ref - 1.0); };
    r.checks.push_back(CheckResult::at_most("lambda_th", rel(e.lambda_th, 3.0e-12), 0.02));
    r.checks.push_back(CheckResult::at_most("n", rel(e.n, 2.46e25), 0.01));
    r.checks.push_back(CheckResult::at_most("v_bar", rel(e.v_bar, 472.0), 0.01));
    r.checks.push_back(CheckResult::at_most("eta", rel(e.eta, 3.6e22), 0.03));
  }
  return r;
}

inline ScenarioResult verify_all_scenario(const ScenarioConfig& c, Artifacts& out) {
  VerifyOptions opts;
  if (c.text("verify.inject") != "none")
    for (const auto& name : detail::split_list(c.text("verify.inject"))) opts.inject.insert(name);
  const auto report = verify_all(c.seed, opts);
  {
    auto f = out.open("report.txt");
    report.write(f);
  }
  ScenarioResult r;
  for (const auto& e : report.entries) {
    r.checks.push_back(e.check);
    r.checks.back().name = e.module + "/" + e.check.name;
  }
  return r;
}

inline ScenarioResult dispatch(const ScenarioConfig& c, Artifacts& out) {
  const auto& s = c.scenario;
  if (s == "interference-bounce") return interference_bounce(c, out);
  if (s == "single-collision") return single_collision(c, out);
  if (s == "z-statistics") return z_statistics(c, out);
  if (s == "grw-vs-bath") return grw_vs_bath(c, out);
  if (s == "com-amplification") return com_amplification(c, out);
  if (s == "classical-trajectory") return classical_trajectory(c, out);
  if (s == "estimates") return estimates(c, out);
  if (s == "verify-all") return verify_all_scenario(c, out);
  throw Error(Errc::config_parse, "unknown scenario '" + s + "'");
}

/// Runs one scenario into `root/<scenario>/`, replacing whatever an earlier
/// run left there. Writes resolved.cfg and manifest.txt next to the data.
/// Domain errors are recorded in the manifest and rethrown with the
/// scenario name prepended.
inline RunManifest run_scenario(const ScenarioConfig& config, const std::filesystem::path& root) {
  const auto dir = root / config.scenario;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    auto f = csv::open(dir / "resolved.cfg");
    config.write(f);
  }
  RunManifest m{config, utc_now(), {}, {}, {}, {}, {}};
  Artifacts out(dir);
  auto finish = [&] {
    m.finished = utc_now();
    m.outputs.emplace_back("resolved.cfg", file_hash(dir / "resolved.cfg"));
    for (const auto& name : out.files()) m.outputs.emplace_back(name, file_hash(dir / name));
    auto f = csv::open(dir / "manifest.txt");
    m.write(f);
  };
  try {
    auto result = dispatch(config, out);
    m.checks = std::move(result.checks);
    m.warnings = std::move(result.warnings);
  } catch (const Error& e) {
    m.error = e.what();
    finish();
    e.rethrow_with("scenario " + config.scenario);
  }
  finish();
  return m;
}

}  // namespace bohmgrw::harness
