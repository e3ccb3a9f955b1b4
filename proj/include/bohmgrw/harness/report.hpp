#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <ostream>
#include <string>
#include <vector>

#include "bohmgrw/csv.hpp"
#include "bohmgrw/harness/config.hpp"

namespace bohmgrw::harness {

inline constexpr const char* tool_name = "bohmgrw";
inline constexpr const char* tool_version = "0.1.0";

/// One acceptance check: `value` compared with `limit`.
struct CheckResult {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  /// "<=", ">=" or "==" (boolean predicates use 1 for true).
  std::string relation = "<=";
  bool pass = false;

  static CheckResult at_most(std::string name, double value, double limit) {
    return {std::move(name), value, limit, "<=", value <= limit};
  }
  static CheckResult at_least(std::string name, double value, double limit) {
    return {std::move(name), value, limit, ">=", value >= limit};
  }
  static CheckResult holds(std::string name, bool ok) { return {std::move(name), ok ? 1.0 : 0.0, 1.0, "==", ok}; }
};

inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// 64-bit FNV-1a of a file's bytes.
inline std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::invalid_argument, "cannot read " + path.string());
  std::uint64_t h = 14695981039346656037ull;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    h ^= static_cast<unsigned char>(*it);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Files written by one scenario, all inside its own directory.
class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }

  std::ofstream open(const std::string& name) {
    files_.push_back(name);
    return csv::open(dir_ / name);
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

struct RunManifest {
  ScenarioConfig config;
  std::string started;
  std::string finished;
  std::vector<CheckResult> checks;
  /// (file name, hash) for every artifact.
  std::vector<std::pair<std::string, std::uint64_t>> outputs;
  std::vector<std::string> warnings;
  /// Domain error that stopped the scenario, empty on completion.
  std::string error;

  bool pass() const {
    if (!error.empty()) return false;
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  void write(std::ostream& out) const {
    out << "[manifest]\n"
        << "tool = " << tool_name << "\n"
        << "version = " << tool_version << "\n"
        << "scenario = " << config.scenario << "\n"
        << "seed = " << config.seed << "\n"
        << "started = " << started << "\n"
        << "finished = " << finished << "\n"
        << "status = " << (error.empty() ? (pass() ? "pass" : "fail") : "error") << "\n";
    if (!error.empty()) out << "error = " << error << "\n";
    out << "\n[checks]\n";
    for (const auto& c : checks)
      out << c.name << " = " << (c.pass ? "pass" : "fail") << " (" << short_number(c.value) << " " << c.relation << " "
          << short_number(c.limit) << ")\n";
    out << "\n[outputs]\n";
    for (const auto& [name, h] : outputs) out << name << " = fnv1a:" << hex(h) << "\n";
    if (!warnings.empty()) {
      out << "\n[warnings]\n";
      for (std::size_t i = 0; i < warnings.size(); ++i) out << "w" << i + 1 << " = " << warnings[i] << "\n";
    }
    out << "\n# resolved configuration (also in resolved.cfg)\n";
    std::ostringstream cfg;
    config.write(cfg);
    std::istringstream lines(cfg.str());
    for (std::string line; std::getline(lines, line);) out << "# " << line << "\n";
  }
};

}  // namespace bohmgrw::harness
