#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bohmgrw/harness/config.hpp"
#include "bohmgrw/harness/report.hpp"
#include "bohmgrw/harness/scenarios.hpp"
#include "bohmgrw/harness/verify.hpp"

using namespace bohmgrw;
using namespace bohmgrw::harness;

namespace {

ConfigText parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "t.cfg");
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::config_parse);
    return e.what();
  }
  return {};
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("bohmgrw_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ScenarioConfig small_collision() {
  auto c = ScenarioConfig::defaults("single-collision");
  c.set("run.samples", "2");
  return c;
}

}  // namespace

TEST(ConfigParser, SectionsCommentsAndWhitespace) {
  const auto t = parse("# top\nscenario = estimates\n\n[gas]\n  name=ar  \n; note\ntemperature = 300\n");
  ASSERT_EQ(t.entries.size(), 3u);
  EXPECT_EQ(t.find("scenario")->value, "estimates");
  EXPECT_EQ(t.find("gas.name")->value, "ar");
  EXPECT_EQ(t.find("gas.temperature")->line, 7u);
  EXPECT_EQ(t.find("name"), nullptr);
}

TEST(ConfigParser, ErrorsCarrySourceAndLine) {
  EXPECT_NE(parse_error("a = 1\njunk\n").find("t.cfg:2:"), std::string::npos);
  EXPECT_NE(parse_error("[run\n").find("t.cfg:1:"), std::string::npos);
  const auto dup = parse_error("[run]\nT = 1\n\nT = 2\n");
  EXPECT_NE(dup.find("t.cfg:4:"), std::string::npos);
  EXPECT_NE(parse_error("[r un]\n").find("t.cfg:1:"), std::string::npos);
}

TEST(ScenarioConfig, EveryScenarioHasDefaults) {
  for (const auto& name : scenario_names()) {
    const auto c = ScenarioConfig::defaults(name);
    EXPECT_EQ(c.scenario, name);
    EXPECT_EQ(c.seed, 7u);
  }
  EXPECT_THROW(ScenarioConfig::defaults("nope"), Error);
}

TEST(ScenarioConfig, UnknownKeyAndBadTypeNameTheLine) {
  auto c = ScenarioConfig::defaults("grw-vs-bath");
  try {
    c.apply(parse("[bath]\nsigmaa = 1\n"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::config_parse);
    EXPECT_NE(std::string(e.what()).find("t.cfg:2: unknown key 'bath.sigmaa'"), std::string::npos);
  }
  EXPECT_THROW(c.apply(parse("[run]\nruns = many\n")), Error);
  EXPECT_THROW(c.apply(parse("[run]\nruns = 1.5\n")), Error);
  EXPECT_THROW(c.apply(parse("scenario = estimates\n")), Error);
  EXPECT_THROW(c.apply(parse("seed = -3\n")), Error);
}

TEST(ScenarioConfig, TypedAccessors) {
  auto c = ScenarioConfig::defaults("com-amplification");
  c.set("run.particles", "1, 3,9");
  EXPECT_EQ(c.integers("run.particles"), (std::vector<long long>{1, 3, 9}));
  c.set("run.lambda", "2.5e-1");
  EXPECT_DOUBLE_EQ(c.real("run.lambda"), 0.25);
  c.set("run.runs", "0");
  EXPECT_THROW(c.count("run.runs"), Error);

  auto b = ScenarioConfig::defaults("interference-bounce");
  EXPECT_FALSE(b.flag("bath.enabled"));
  b.set("bath.enabled", "true");
  EXPECT_TRUE(b.flag("bath.enabled"));
  EXPECT_THROW(b.set("bath.enabled", "yes"), Error);
}

TEST(ScenarioConfig, SeedPrecedence) {
  auto c = ScenarioConfig::defaults("estimates");
  c.apply(parse("seed = 99\n"));
  EXPECT_EQ(c.seed, 99u);
  c.apply(parse("seed = 5\n"), true);
  EXPECT_EQ(c.seed, 99u);
  c.apply(parse("seed = 18446744073709551615\n"));
  EXPECT_EQ(c.seed, 18446744073709551615ull);
}

// Property: writing a config and reading it back reproduces it byte for byte.
TEST(ScenarioConfig, ResolvedConfigRoundTrips) {
  for (const auto& name : scenario_names()) {
    auto c = ScenarioConfig::defaults(name);
    c.seed = 123456789012345ull;
    std::ostringstream first;
    c.write(first);
    auto back = ScenarioConfig::defaults(name);
    back.apply(parse(first.str()));
    std::ostringstream second;
    back.write(second);
    EXPECT_EQ(first.str(), second.str()) << name;
    EXPECT_EQ(back.seed, c.seed);
  }
}

TEST(Report, HashAndChecks) {
  const auto dir = scratch("hash");
  std::filesystem::create_directories(dir);
  { std::ofstream(dir / "a") << "a"; }
  EXPECT_EQ(file_hash(dir / "a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(hex(0xabcull), "0000000000000abc");
  EXPECT_TRUE(CheckResult::at_most("x", 1.0, 1.0).pass);
  EXPECT_FALSE(CheckResult::at_least("x", 0.5, 1.0).pass);
  EXPECT_FALSE(CheckResult::holds("x", false).pass);
  std::filesystem::remove_all(dir);
}

TEST(RunScenario, ManifestListsEveryOutputWithItsHash) {
  const auto root = scratch("manifest");
  const auto m = run_scenario(ScenarioConfig::defaults("estimates"), root);
  EXPECT_TRUE(m.pass());
  const auto dir = root / "estimates";
  ASSERT_FALSE(m.outputs.empty());
  for (const auto& [name, h] : m.outputs) {
    ASSERT_TRUE(std::filesystem::exists(dir / name)) << name;
    EXPECT_EQ(file_hash(dir / name), h) << name;
  }
  const auto manifest = slurp(dir / "manifest.txt");
  EXPECT_NE(manifest.find("status = pass"), std::string::npos);
  EXPECT_NE(manifest.find("estimates.txt = fnv1a:"), std::string::npos);
  std::filesystem::remove_all(root);
}

TEST(RunScenario, RerunReplacesStaleFiles) {
  const auto root = scratch("stale");
  std::filesystem::create_directories(root / "estimates");
  { std::ofstream(root / "estimates" / "old.csv") << "x"; }
  run_scenario(ScenarioConfig::defaults("estimates"), root);
  EXPECT_FALSE(std::filesystem::exists(root / "estimates" / "old.csv"));
  std::filesystem::remove_all(root);
}

TEST(RunScenario, SameSeedSameBytes) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  const auto ma = run_scenario(small_collision(), a);
  const auto mb = run_scenario(small_collision(), b);
  EXPECT_TRUE(ma.pass());
  EXPECT_EQ(ma.outputs, mb.outputs);

  auto other = small_collision();
  other.seed = 8;
  const auto mc = run_scenario(other, b);
  bool differs = false;
  for (std::size_t i = 0; i < mc.outputs.size(); ++i)
    if (mc.outputs[i].first != "resolved.cfg" && mc.outputs[i].second != ma.outputs[i].second) differs = true;
  EXPECT_TRUE(differs);
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST(RunScenario, ReproducesFromResolvedConfig) {
  const auto a = scratch("repro_a"), b = scratch("repro_b");
  auto c = small_collision();
  c.seed = 31;
  const auto first = run_scenario(c, a);
  auto again = ScenarioConfig::defaults("single-collision");
  again.apply(load_config(a / "single-collision" / "resolved.cfg"));
  const auto second = run_scenario(again, b);
  EXPECT_EQ(first.outputs, second.outputs);
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST(RunScenario, DomainErrorIsRecordedAndRethrown) {
  const auto root = scratch("escape");
  auto c = ScenarioConfig::defaults("interference-bounce");
  c.set("grid.half_width", "12");
  c.set("grid.points", "512");
  c.set("run.T", "6");
  try {
    run_scenario(c, root);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::domain_escape);
    EXPECT_NE(std::string(e.what()).find("scenario interference-bounce"), std::string::npos);
  }
  const auto manifest = slurp(root / "interference-bounce" / "manifest.txt");
  EXPECT_NE(manifest.find("status = error"), std::string::npos);
  std::filesystem::remove_all(root);
}

TEST(Verify, CorruptFailsEveryRelation) {
  for (auto c : {CheckResult::at_most("a", 0.1, 1.0), CheckResult::at_least("b", 2.0, 1.0),
                 CheckResult::holds("c", true)}) {
    harness::detail::corrupt(c);
    EXPECT_FALSE(c.pass);
  }
}

// One suite run with a fault injected: only that check fails, and the rest
// of the report is the same as a clean run.
TEST(Verify, InjectionIsIsolatedAndReportIsDeterministic) {
  const auto clean = verify_all(11);
  const auto again = verify_all(11);
  std::ostringstream r1, r2;
  clean.write(r1);
  again.write(r2);
  EXPECT_EQ(r1.str(), r2.str());
  EXPECT_TRUE(clean.pass()) << r1.str();
  EXPECT_EQ(clean.entries.size(), 21u);

  VerifyOptions opts;
  opts.inject = {"norm-drift", "grw-collapse/unraveling"};
  const auto hurt = verify_all(11, opts);
  ASSERT_EQ(hurt.entries.size(), clean.entries.size());
  for (std::size_t i = 0; i < hurt.entries.size(); ++i) {
    const auto& e = hurt.entries[i];
    const bool target = e.check.name == "norm-drift" || e.check.name == "unraveling";
    EXPECT_EQ(e.check.pass, !target) << e.module << "/" << e.check.name;
    if (!target) EXPECT_EQ(e.check.value, clean.entries[i].check.value) << e.check.name;
  }
  EXPECT_FALSE(hurt.pass());
}
