#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bohmgrw/field.hpp"
#include "bohmgrw/interp.hpp"
#include "bohmgrw/propagate.hpp"

namespace bohmgrw::bohm {

/// Guidance velocity sampled on the grid at one instant.
struct VelocityFieldFrame {
  Grid1D grid;
  std::vector<double> v;
  double time = 0.0;

  /// Cubic (four-point) interpolation with periodic wrap.
  double at(double x) const {
    const double s = (x - grid.x_min()) / grid.dx();
    const auto n = v.size();
    return interp::cubic(s, [&](long i) { return v[interp::wrap(i, n)]; });
  }
};

/// Relative density floor below which the velocity is regularized.
inline constexpr double node_floor = 1e-12;

/// v = (hbar/m) Im(psi* d_x psi) / |psi|^2 with a spectral derivative.
///
/// The real and imaginary parts are differentiated separately so a real
/// field yields exactly zero current. Where |psi|^2 < eps = 1e-12 max|psi|^2
/// the denominator becomes |psi|^2 + eps, and every entry is clamped to
/// 10 (hbar/m) k_Nyquist.
inline VelocityFieldFrame velocity_field(const ComplexField1D& psi, const UnitsContext& units,
                                         double time = 0.0) {
  const auto& g = psi.grid();
  const auto n = psi.size();
  std::vector<double> re(n), im(n);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = psi[i].real();
    im[i] = psi[i].imag();
  }
  const bool real_field = std::all_of(im.begin(), im.end(), [](double b) { return b == 0.0; });
  VelocityFieldFrame frame{g, std::vector<double>(n, 0.0), time};
  if (real_field) return frame;

  const auto d_re = spectral_derivative_real(re, g);
  const auto d_im = spectral_derivative_real(im, g);
  const double scale = units.hbar / units.mass;
  const double eps = node_floor * psi.max_abs2();
  const double vmax = 10.0 * scale * g.k_nyquist();
  for (std::size_t i = 0; i < n; ++i) {
    const double current = re[i] * d_im[i] - im[i] * d_re[i];
    const double rho = re[i] * re[i] + im[i] * im[i];
    const double denom = rho < eps ? rho + eps : rho;
    frame.v[i] = std::clamp(scale * current / denom, -vmax, vmax);
  }
  return frame;
}

}  // namespace bohmgrw::bohm
