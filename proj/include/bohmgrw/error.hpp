#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bohmgrw {

enum class Errc {
  invalid_argument,
  aliasing,
  numeric_overflow,
  degenerate_distribution,
  domain_escape,
  null_slice,
  resource_limit,
  collapse_to_null,
  integrator_tolerance,
  grid_resolution,
  config_parse,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::aliasing: return "aliasing";
    case Errc::numeric_overflow: return "numeric-overflow";
    case Errc::degenerate_distribution: return "degenerate-distribution";
    case Errc::domain_escape: return "domain-escape";
    case Errc::null_slice: return "null-slice";
    case Errc::resource_limit: return "resource-limit";
    case Errc::collapse_to_null: return "collapse-to-null";
    case Errc::integrator_tolerance: return "integrator-tolerance";
    case Errc::grid_resolution: return "grid-resolution";
    case Errc::config_parse: return "config-parse";
  }
  return "unknown";
}

/// All library failures are reported through this type; `code()` names the
/// failure class so callers (and tests) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

  /// Re-throws with extra context prepended, keeping the error class.
  [[noreturn]] void rethrow_with(const std::string& context) const {
    throw Error(code_, context + ": " + detail());
  }

  std::string detail() const {
    std::string msg = what();
    const auto prefix = std::string(errc_name(code_)) + ": ";
    return msg.rfind(prefix, 0) == 0 ? msg.substr(prefix.size()) : msg;
  }

 private:
  Errc code_;
};

/// Three significant digits, for numbers in error messages.
inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline void require(bool condition, Errc code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace bohmgrw
