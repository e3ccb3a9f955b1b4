#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "bohmgrw/error.hpp"
#include "bohmgrw/grid.hpp"

namespace bohmgrw::bath {

/// Ideal-gas environment and a rigid spherical system, SI units.
struct EnvironmentInputs {
  double m_gas = 4.7e-26;   // kg, one N2 molecule
  double T = 298.0;         // K
  double p0 = 101325.0;     // Pa
  double R = 1e-3;          // m

  void validate() const {
    require(std::isfinite(m_gas) && m_gas > 0.0, Errc::invalid_argument, "gas mass must be positive");
    require(std::isfinite(T) && T > 0.0, Errc::invalid_argument, "temperature must be positive");
    require(std::isfinite(p0) && p0 > 0.0, Errc::invalid_argument, "pressure must be positive");
    require(std::isfinite(R) && R > 0.0, Errc::invalid_argument, "radius must be positive");
  }
};

/// Molecular mass for a named gas.
inline double gas_mass(const std::string& name) {
  if (name == "n2") return 4.7e-26;
  if (name == "o2") return 5.31e-26;
  if (name == "ar") return 6.63e-26;
  if (name == "he") return 6.65e-27;
  throw Error(Errc::invalid_argument, "unknown gas '" + name + "' (known: n2, o2, ar, he)");
}

struct EnvironmentEstimate {
  EnvironmentInputs inputs;
  double lambda_th;   // thermal de Broglie wavelength, m
  double n;           // number density, m^-3
  double v_bar;       // mean molecular speed, m/s
  double sigma_cs;    // geometric cross section, m^2
  double eta;         // collision rate, 1/s
  double r_C_eff;     // equivalent localization width sqrt(2) lambda_th, m
  double lambda_eff;  // equivalent collapse rate, 1/s

  /// Fixed-order key=value table, 3 significant digits.
  void write(std::ostream& out) const {
    auto line = [&](const char* key, double v) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.2e", v);
      out << key << '=' << buf << '\n';
    };
    line("lambda_th", lambda_th);
    line("n", n);
    line("v_bar", v_bar);
    line("sigma_CS", sigma_cs);
    line("eta", eta);
    line("r_C_eff", r_C_eff);
    line("lambda_eff", lambda_eff);
  }
};

inline EnvironmentEstimate environment_estimates(const EnvironmentInputs& in = {}) {
  in.validate();
  using std::numbers::pi;
  const double kT = si::k_boltzmann * in.T;
  EnvironmentEstimate e{in, 0, 0, 0, 0, 0, 0, 0};
  e.lambda_th = si::hbar / std::sqrt(2.0 * pi * in.m_gas * kT);
  e.n = in.p0 / kT;
  e.v_bar = std::sqrt(8.0 * kT / (pi * in.m_gas));
  e.sigma_cs = pi * in.R * in.R;
  e.eta = e.n * e.sigma_cs * e.v_bar;
  e.r_C_eff = std::sqrt(2.0) * e.lambda_th;
  e.lambda_eff = e.eta;
  return e;
}

}  // namespace bohmgrw::bath
