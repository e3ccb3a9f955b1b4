#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bohmgrw/error.hpp"

namespace bohmgrw::harness {

/// One `key = value` line. Keys inside a `[section]` are stored as
/// `section.key`.
struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct ConfigText {
  std::string source;
  std::vector<ConfigEntry> entries;

  const ConfigEntry* find(std::string_view key) const {
    for (const auto& e : entries)
      if (e.key == key) return &e;
    return nullptr;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

inline bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

[[noreturn]] inline void parse_fail(const std::string& source, std::size_t line, const std::string& what) {
  throw Error(Errc::config_parse, source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace detail

/// Flat `key = value` text with `[section]` headers. `#` and `;` start a
/// comment line. Duplicate keys are an error.
inline ConfigText parse_config(std::istream& in, std::string source = "<config>") {
  ConfigText out{std::move(source), {}};
  std::string section, raw;
  std::size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    const auto line = detail::trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') detail::parse_fail(out.source, n, "unterminated section header");
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      if (!detail::valid_name(section)) detail::parse_fail(out.source, n, "bad section name '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) detail::parse_fail(out.source, n, "expected 'key = value'");
    const auto key = detail::trim(std::string_view(line).substr(0, eq));
    if (!detail::valid_name(key)) detail::parse_fail(out.source, n, "bad key '" + key + "'");
    const auto full = section.empty() ? key : section + "." + key;
    if (const auto* prev = out.find(full))
      detail::parse_fail(out.source, n, "duplicate key '" + full + "' (first set on line " + std::to_string(prev->line) + ")");
    out.entries.push_back({full, detail::trim(std::string_view(line).substr(eq + 1)), n});
  }
  return out;
}

inline ConfigText load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config_parse, "cannot open config file " + path.string());
  return parse_config(in, path.string());
}

enum class SettingKind { real, integer, flag, text, real_list, integer_list };

struct Setting {
  std::string key;
  SettingKind kind;
  std::string value;
  std::string help;
};

namespace detail {

inline std::optional<double> to_real(std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<long long> to_integer(std::string_view s) {
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> to_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

inline std::optional<std::string> kind_error(SettingKind kind, const std::string& v) {
  switch (kind) {
    case SettingKind::real:
      if (!to_real(v)) return "expected a number";
      break;
    case SettingKind::integer:
      if (!to_integer(v)) return "expected an integer";
      break;
    case SettingKind::flag:
      if (v != "true" && v != "false") return "expected true or false";
      break;
    case SettingKind::text:
      if (v.empty()) return "expected a value";
      break;
    case SettingKind::real_list:
      for (const auto& item : split_list(v))
        if (!to_real(item)) return "expected a comma-separated list of numbers";
      break;
    case SettingKind::integer_list:
      for (const auto& item : split_list(v))
        if (!to_integer(item)) return "expected a comma-separated list of integers";
      break;
  }
  return std::nullopt;
}

}  // namespace detail

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"interference-bounce", "single-collision", "z-statistics",
                                              "grw-vs-bath",         "com-amplification", "classical-trajectory",
                                              "estimates",           "verify-all"};
  return names;
}

/// Fully resolved settings of one scenario run. Every scenario has a fixed
/// table of keys with defaults; a config file or override can only change
/// values of keys in that table.
class ScenarioConfig {
 public:
  std::string scenario;
  std::uint64_t seed = 7;

  /// Defaults for a named scenario; unknown names are a config error.
  static ScenarioConfig defaults(const std::string& scenario);

  const std::vector<Setting>& settings() const { return settings_; }

  /// Sets one key; the value is type-checked against the key's kind.
  void set(const std::string& key, const std::string& value, const std::string& where = "override") {
    auto* s = lookup(key);
    if (!s) throw Error(Errc::config_parse, where + ": unknown key '" + key + "' for scenario " + scenario);
    if (const auto err = detail::kind_error(s->kind, value))
      throw Error(Errc::config_parse, where + ": key '" + key + "': " + *err + ", got '" + value + "'");
    s->value = value;
  }

  /// Applies a parsed file. Top-level `scenario` must agree with this
  /// config; top-level `seed` is taken unless `keep_seed` is set.
  void apply(const ConfigText& text, bool keep_seed = false) {
    for (const auto& e : text.entries) {
      const auto where = text.source + ":" + std::to_string(e.line);
      if (e.key == "scenario") {
        if (e.value != scenario)
          throw Error(Errc::config_parse, where + ": file is for scenario '" + e.value + "', not " + scenario);
      } else if (e.key == "seed") {
        const auto v = detail::to_u64(e.value);
        if (!v) throw Error(Errc::config_parse, where + ": key 'seed': expected an unsigned 64-bit integer");
        if (!keep_seed) seed = *v;
      } else {
        set(e.key, e.value, where);
      }
    }
  }

  double real(const std::string& key) const { return *detail::to_real(get(key, SettingKind::real)); }
  long long integer(const std::string& key) const { return *detail::to_integer(get(key, SettingKind::integer)); }
  bool flag(const std::string& key) const { return get(key, SettingKind::flag) == "true"; }
  const std::string& text(const std::string& key) const { return get(key, SettingKind::text); }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : detail::split_list(get(key, SettingKind::real_list))) out.push_back(*detail::to_real(s));
    return out;
  }
  std::vector<long long> integers(const std::string& key) const {
    std::vector<long long> out;
    for (const auto& s : detail::split_list(get(key, SettingKind::integer_list)))
      out.push_back(*detail::to_integer(s));
    return out;
  }

  /// Positive integer setting.
  std::size_t count(const std::string& key) const {
    const auto v = integer(key);
    require(v > 0, Errc::config_parse, "key '" + key + "' must be positive");
    return static_cast<std::size_t>(v);
  }

  /// Resolved config in the file format; loading it back reproduces this
  /// config exactly.
  void write(std::ostream& out) const {
    out << "scenario = " << scenario << "\n"
        << "seed = " << seed << "\n";
    std::string section;
    for (const auto& s : settings_) {
      const auto dot = s.key.find('.');
      const auto sec = dot == std::string::npos ? std::string() : s.key.substr(0, dot);
      if (sec != section) {
        out << "\n[" << sec << "]\n";
        section = sec;
      }
      out << "# " << s.help << "\n" << s.key.substr(dot + 1) << " = " << s.value << "\n";
    }
  }

 private:
  std::vector<Setting> settings_;

  Setting* lookup(const std::string& key) {
    for (auto& s : settings_)
      if (s.key == key) return &s;
    return nullptr;
  }

  const std::string& get(const std::string& key, SettingKind kind) const {
    for (const auto& s : settings_)
      if (s.key == key) {
        if (s.kind != kind) throw Error(Errc::invalid_argument, "setting '" + key + "' read with the wrong type");
        return s.value;
      }
    throw Error(Errc::invalid_argument, "scenario " + scenario + " has no setting '" + key + "'");
  }

  void add(std::string key, SettingKind kind, std::string value, std::string help) {
    settings_.push_back({std::move(key), kind, std::move(value), std::move(help)});
  }

  friend ScenarioConfig make_defaults(const std::string&);
};

inline ScenarioConfig make_defaults(const std::string& scenario) {
  using K = SettingKind;
  ScenarioConfig c;
  c.scenario = scenario;
  auto grid = [&](const char* half, const char* points) {
    c.add("grid.half_width", K::real, half, "half length of the periodic box");
    c.add("grid.points", K::integer, points, "number of grid points (power of two)");
  };
  auto lobes = [&](const char* sep, const char* width) {
    c.add("system.separation", K::real, sep, "distance between the two Gaussian lobes");
    c.add("system.width", K::real, width, "width of each lobe");
  };
  if (scenario == "interference-bounce") {
    grid("40", "1024");
    c.add("packet.mu", K::real, "5", "the packets start at -mu and +mu");
    c.add("packet.sigma", K::real, "1", "packet width");
    c.add("packet.velocity", K::real, "2", "packets move towards each other at this speed");
    c.add("run.T", K::real, "5", "duration");
    c.add("run.max_dt", K::real, "0.01", "largest propagator step");
    c.add("run.start", K::real, "-5", "starting position of the tracked particle");
    c.add("run.snapshots", K::integer, "6", "number of density snapshots written");
    c.add("bath.enabled", K::flag, "false", "whether bath particles collide with the system");
    c.add("bath.sigma", K::real, "4", "bath packet width");
    c.add("bath.rate", K::real, "20", "collision rate");
  } else if (scenario == "single-collision") {
    c.add("grid.x_half_width", K::real, "8", "half length of the system box");
    c.add("grid.x_points", K::integer, "512", "system grid points");
    c.add("grid.y_half_width", K::real, "12", "half length of the bath box");
    c.add("grid.y_points", K::integer, "512", "bath grid points");
    lobes("4", "0.6");
    c.add("bath.sigma", K::real, "0.7", "bath packet width");
    c.add("window.t_i", K::real, "0", "coupling switched on");
    c.add("window.t_f", K::real, "1", "coupling switched off");
    c.add("run.samples", K::integer, "5", "times inside the window at which the slices are compared");
    c.add("check.tolerance", K::real, "1e-6", "largest allowed sup-norm distance");
  } else if (scenario == "z-statistics") {
    grid("40", "1024");
    c.add("packet.mu", K::real, "5", "the packets start at -mu and +mu");
    c.add("packet.sigma", K::real, "1", "packet width");
    c.add("packet.velocity", K::real, "2", "packets move towards each other at this speed");
    c.add("packet.evolve", K::real, "2.5", "free evolution before the collision");
    c.add("bath.sigma", K::real, "0.5", "bath packet width");
    c.add("run.samples", K::integer, "10000", "number of localization centres");
    c.add("run.bins", K::integer, "256", "histogram bins");
  } else if (scenario == "grw-vs-bath") {
    grid("16", "256");
    lobes("6", "0.7");
    c.add("bath.sigma", K::real, "0.8", "bath packet width; the GRW side uses r_C = sqrt(2) sigma");
    c.add("bath.rate", K::real, "2", "collision rate, equal to the GRW lambda");
    c.add("run.T", K::real, "1", "duration");
    c.add("run.runs", K::integer, "1000", "realizations on each side");
    c.add("run.max_dt", K::real, "0.01", "largest propagator step");
  } else if (scenario == "com-amplification") {
    c.add("run.particles", K::integer_list, "1,2,4,8", "particle counts N");
    c.add("run.lambda", K::real, "1", "per-particle collision rate");
    c.add("run.runs", K::integer, "400", "realizations per N");
    c.add("run.T", K::real, "10", "duration");
    c.add("cluster.spacing", K::real, "1", "distance between neighbouring particles");
    c.add("cluster.relative_width", K::real, "0.1", "spread of the relative coordinates");
    c.add("cluster.com_width", K::real, "5", "initial centre-of-mass width");
    c.add("bath.sigma", K::real, "1", "bath packet width");
  } else if (scenario == "classical-trajectory") {
    c.add("newton.omega", K::real, "1", "harmonic angular frequency (natural units)");
    c.add("newton.x0", K::real, "1", "initial mean position");
    c.add("newton.v0", K::real, "0", "initial mean velocity");
    c.add("newton.steps", K::integer, "2000", "integration steps per period");
    c.add("newton.tolerance", K::real, "1e-3", "largest allowed |x'' + omega^2 x|");
    c.add("sphere.Lambda", K::real, "3.6e22", "localization rate, 1/s");
    c.add("sphere.r_C", K::real, "4.2426e-12", "localization width, m");
    c.add("sphere.mass", K::real, "1e-3", "mass, kg");
    c.add("sphere.T", K::real, "1", "duration of the stochastic paths, s");
    c.add("sphere.steps", K::integer, "1000", "Euler-Maruyama steps");
    c.add("sphere.paths", K::integer, "1000", "number of stochastic paths");
    c.add("sphere.factor", K::real, "2", "allowed ratio between measured and predicted fluctuations");
  } else if (scenario == "estimates") {
    c.add("gas.name", K::text, "n2", "gas species (n2, o2, ar, he)");
    c.add("gas.temperature", K::real, "298", "temperature, K");
    c.add("gas.pressure", K::real, "101325", "pressure, Pa");
    c.add("system.radius", K::real, "1e-3", "radius of the sphere, m");
  } else if (scenario == "verify-all") {
    c.add("verify.inject", K::text, "none", "comma-separated check names to corrupt, or none");
  } else {
    std::string known;
    for (const auto& n : scenario_names()) known += (known.empty() ? "" : ", ") + n;
    throw Error(Errc::config_parse, "unknown scenario '" + scenario + "' (known: " + known + ")");
  }
  return c;
}

inline ScenarioConfig ScenarioConfig::defaults(const std::string& scenario) { return make_defaults(scenario); }

}  // namespace bohmgrw::harness
