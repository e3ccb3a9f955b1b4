// bohmgrw: scenario runner, environment estimates and verification suite.
//
// Exit codes: 0 all checks pass, 1 a check failed or a scenario stopped on
// a domain error, 2 usage or configuration error (including parameter values
// the library rejects).

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bohmgrw/bath/estimates.hpp"
#include "bohmgrw/harness/config.hpp"
#include "bohmgrw/harness/report.hpp"
#include "bohmgrw/harness/scenarios.hpp"
#include "bohmgrw/harness/verify.hpp"

namespace {

using namespace bohmgrw;
using namespace bohmgrw::harness;

constexpr int exit_pass = 0, exit_fail = 1, exit_usage = 2;

void print_checks(const RunManifest& m) {
  for (const auto& c : m.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << m.config.scenario << "/" << c.name << "  " << short_number(c.value)
              << " " << c.relation << " " << short_number(c.limit) << "\n";
  for (const auto& w : m.warnings) std::cout << "warning: " << w << "\n";
}

int run_command(const std::optional<std::string>& scenario, const std::optional<std::string>& config_file,
                const std::optional<std::uint64_t>& seed, const std::string& out,
                const std::vector<std::string>& overrides) {
  std::optional<ConfigText> text;
  if (config_file) text = load_config(*config_file);
  std::string name;
  if (scenario) {
    name = *scenario;
  } else if (text && text->find("scenario")) {
    name = text->find("scenario")->value;
  } else {
    throw Error(Errc::config_parse, "no scenario given (use --scenario or a 'scenario' key in the config)");
  }
  auto cfg = ScenarioConfig::defaults(name);
  if (text) cfg.apply(*text, seed.has_value());
  if (seed) cfg.seed = *seed;
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(Errc::config_parse, "--set expects key=value, got '" + kv + "'");
    cfg.set(bohmgrw::harness::detail::trim(kv.substr(0, eq)), bohmgrw::harness::detail::trim(kv.substr(eq + 1)),
            "--set");
  }

  std::cout << "running " << cfg.scenario << " (seed " << cfg.seed << ") into "
            << (std::filesystem::path(out) / cfg.scenario).string() << "\n";
  try {
    const auto m = run_scenario(cfg, out);
    print_checks(m);
    std::cout << (m.pass() ? "scenario passed" : "scenario FAILED") << "\n";
    return m.pass() ? exit_pass : exit_fail;
  } catch (const Error& e) {
    // Bad parameter values are configuration errors; the rest are domain failures.
    if (e.code() == Errc::config_parse || e.code() == Errc::invalid_argument) throw;
    std::cerr << "error: " << e.what() << "\n";
    return exit_fail;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bohmian trajectories, GRW collapse and collision-bath simulations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tool_name) + " " + tool_version);

  auto* run = app.add_subcommand("run", "run one scenario and write its outputs");
  std::optional<std::string> scenario, config_file;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::vector<std::string> overrides;
  run->add_option("--scenario", scenario, "scenario name")->check(CLI::IsMember(scenario_names()));
  run->add_option("--config", config_file, "key=value config file")->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "64-bit seed (overrides the config file)");
  run->add_option("--out", out, "output root; the scenario writes to <out>/<scenario>")->capture_default_str();
  run->add_option("--set", overrides, "override one setting, e.g. --set run.T=2");

  auto* est = app.add_subcommand("estimates", "print environment estimates for a sphere in a gas");
  std::string gas = "n2";
  double radius = 1e-3, temp = 298.0, pressure = 101325.0;
  est->add_option("--gas", gas, "gas species: n2, o2, ar, he")->capture_default_str();
  est->add_option("--radius", radius, "sphere radius in m")->capture_default_str();
  est->add_option("--temp", temp, "temperature in K")->capture_default_str();
  est->add_option("--pressure", pressure, "pressure in Pa")->capture_default_str();

  auto* ver = app.add_subcommand("verify", "run the verification suite");
  std::uint64_t verify_seed = 7;
  std::vector<std::string> inject;
  std::optional<std::string> report_file;
  ver->add_option("--seed", verify_seed, "64-bit seed")->capture_default_str();
  ver->add_option("--inject", inject, "corrupt the named check (fault-injection test)");
  ver->add_option("--report", report_file, "also write the report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_pass : exit_usage;
  }

  try {
    if (*run) return run_command(scenario, config_file, seed, out, overrides);

    if (*est) {
      bath::environment_estimates({bath::gas_mass(gas), temp, pressure, radius}).write(std::cout);
      return exit_pass;
    }

    VerifyOptions opts;
    opts.inject.insert(inject.begin(), inject.end());
    const auto report = verify_all(verify_seed, opts);
    report.write(std::cout);
    if (report_file) {
      auto f = csv::open(*report_file);
      report.write(f);
    }
    return report.pass() ? exit_pass : exit_fail;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::config_parse || e.code() == Errc::invalid_argument ? exit_usage : exit_fail;
  }
}
