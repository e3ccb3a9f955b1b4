#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "bohmgrw/error.hpp"
#include "bohmgrw/field.hpp"
#include "bohmgrw/grid.hpp"

namespace bohmgrw::classical {

/// Which rate enters omega, z and the noise coefficients: the amplified
/// collision rate in s^-1 as printed (`rate`) or Lambda / r_C^2 (`qmupl`).
enum class LambdaConvention { rate, qmupl };

inline const char* to_string(LambdaConvention c) { return c == LambdaConvention::rate ? "rate" : "qmupl"; }

struct QmuplParams {
  double Lambda = 1.0;  // amplified localization rate, 1/s
  double r_C = 1.0;     // localization width, m
  double M = 1.0;       // mass, kg
  double hbar = 1.0;    // J s
  LambdaConvention spread_convention = LambdaConvention::rate;

  double Lambda_qmupl() const { return Lambda / (r_C * r_C); }

  /// Rate used in omega, z and the Wiener coefficients.
  double spread_rate() const { return spread_convention == LambdaConvention::rate ? Lambda : Lambda_qmupl(); }

  void validate() const {
    for (double v : {Lambda, r_C, M, hbar})
      require(std::isfinite(v) && v > 0.0, Errc::invalid_argument, "QMUPL parameters must be positive and finite");
  }

  UnitsContext units() const { return {hbar, M, hbar == si::hbar ? UnitMode::si : UnitMode::natural}; }

  static QmuplParams natural() { return {}; }

  /// 1 g sphere of radius 1 mm in air: Lambda = eta = 3.6e22 / s and
  /// r_C = sqrt(2) * 3e-12 m.
  static QmuplParams atmosphere_sphere() {
    return {3.6e22, std::sqrt(2.0) * 3e-12, 1e-3, si::hbar, LambdaConvention::rate};
  }
};

/// Time for an arbitrary state to localize to spread l: 3 / (2 l^2 Lambda_QMUPL).
inline double collapse_time(double l, const QmuplParams& p) {
  p.validate();
  require(l > 0.0 && std::isfinite(l), Errc::invalid_argument, "spread l must be positive");
  return 3.0 / (2.0 * l * l * p.Lambda_qmupl());
}

/// Time after which fluctuations around the classical path exceed L:
/// ((2/3) (L / sqrt(Lambda_QMUPL)) (M / hbar))^(2/3).
inline double classical_time(double L, const QmuplParams& p) {
  p.validate();
  require(L >= 0.0 && std::isfinite(L), Errc::invalid_argument, "length L must be non-negative");
  return std::pow((2.0 / 3.0) * (L / std::sqrt(p.Lambda_qmupl())) * (p.M / p.hbar), 2.0 / 3.0);
}

inline double omega(const QmuplParams& p) { return 2.0 * std::sqrt(p.hbar * p.spread_rate() / p.M); }
inline double delta_q(const QmuplParams& p) { return std::sqrt(p.hbar / (p.M * omega(p))); }
inline double delta_p(const QmuplParams& p) { return std::sqrt(p.hbar * p.M * omega(p) / 2.0); }

/// Coefficient of W in the mean-position equation, sqrt(hbar/M).
inline double position_noise(const QmuplParams& p) { return std::sqrt(p.hbar / p.M); }
/// Coefficient of W in the mean-velocity equation, sqrt(Lambda) hbar / M.
inline double velocity_noise(const QmuplParams& p) { return std::sqrt(p.spread_rate()) * p.hbar / p.M; }

/// Asymptotic localized state: a Gaussian of fixed shape riding on (x_bar, p_bar).
struct GaussianMeanState {
  QmuplParams params;
  double x_bar = 0.0;
  double p_bar = 0.0;
  /// Global phase; carries no dynamics.
  double A = 0.0;

  /// (1 + i) sqrt(Lambda M / hbar).
  cplx z() const { return cplx(1.0, 1.0) * std::sqrt(params.spread_rate() * params.M / params.hbar); }

  /// Coefficient c in exp(-c (x - x_bar)^2): conj(z)/2, the choice whose
  /// spreads are Delta q and Delta p (as printed, z^2/2 is purely imaginary).
  cplx c() const { return std::conj(z()) / 2.0; }

  double v_bar() const { return p_bar / params.M; }
  double dq() const { return delta_q(params); }
  double dp() const { return delta_p(params); }
};

inline GaussianMeanState asymptotic_state(const QmuplParams& params, double x_bar, double p_bar) {
  params.validate();
  require(std::isfinite(x_bar) && std::isfinite(p_bar), Errc::invalid_argument, "mean position and momentum must be finite");
  return {params, x_bar, p_bar, 0.0};
}

/// (2 Re c / pi)^(1/4) exp(-c (x - x_bar)^2 + i p_bar x / hbar + i A) on the grid.
inline ComplexField1D render(const GaussianMeanState& s, const Grid1D& grid) {
  const double dq = s.dq();
  require(dq / grid.dx() >= 16.0, Errc::grid_resolution,
          "grid spacing " + std::to_string(grid.dx()) + " resolves Delta q = " + std::to_string(dq) +
              " with fewer than 16 points");
  require(s.x_bar - 10.0 * dq >= grid.x_min() && s.x_bar + 10.0 * dq < grid.x_max(), Errc::invalid_argument,
          "asymptotic packet does not fit on the grid");
  const double k = s.p_bar / s.params.hbar;
  require(std::abs(k) + 10.0 * s.dp() / s.params.hbar <= 0.5 * grid.k_nyquist(), Errc::grid_resolution,
          "grid does not resolve the packet momentum");
  const cplx c = s.c();
  const double pre = std::pow(2.0 * c.real() / std::numbers::pi, 0.25);
  // The plane wave is written about x_bar so large x_bar * k keeps its precision.
  const cplx phase = std::exp(cplx(0.0, k * s.x_bar + s.A));
  return ComplexField1D::from_function(grid, [&](double x) {
    const double d = x - s.x_bar;
    return pre * phase * std::exp(-c * d * d + cplx(0.0, k * d));
  });
}

/// Timescales and fluctuation magnitudes in SI, 3 significant digits.
struct RegimeReport {
  QmuplParams params;
  double l;
  double L;
  double t_C;
  double t_cl;
  double omega;
  double dq;
  double dp;
  double noise_x;  // sqrt(hbar/M), m s^-1/2
  double noise_v;  // sqrt(Lambda) hbar / M, m s^-3/2

  void write(std::ostream& out) const {
    auto line = [&](const char* key, double v) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.2e", v);
      out << key << '=' << buf << '\n';
    };
    line("t_C", t_C);
    line("t_cl", t_cl);
    line("omega", omega);
    line("delta_q", dq);
    line("delta_p", dp);
    line("noise_x", noise_x);
    line("noise_v", noise_v);
    out << "convention_times=qmupl\n";
    out << "convention_spreads=" << to_string(params.spread_convention) << '\n';
  }
};

inline RegimeReport regime_report(const QmuplParams& p, double l = 1e-3, double L = 1e-3) {
  return {p, l, L, collapse_time(l, p), classical_time(L, p), omega(p), delta_q(p), delta_p(p),
          position_noise(p), velocity_noise(p)};
}

}  // namespace bohmgrw::classical
