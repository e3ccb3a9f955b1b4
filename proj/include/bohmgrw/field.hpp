#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "bohmgrw/error.hpp"
#include "bohmgrw/grid.hpp"

namespace bohmgrw {

using cplx = std::complex<double>;

/// Real samples on a grid (densities, velocities, pdfs).
struct RealField1D {
  Grid1D grid;
  std::vector<double> values;

  RealField1D(Grid1D g, std::vector<double> v) : grid(g), values(std::move(v)) {
    require(values.size() == grid.size(), Errc::invalid_argument, "field/grid size mismatch");
  }

  /// Riemann sum, which equals the trapezoid rule on a periodic grid.
  double integral() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid.dx();
  }
};

/// Sampled wave function psi(x) on a periodic grid.
class ComplexField1D {
 public:
  explicit ComplexField1D(Grid1D grid) : grid_(grid), values_(grid.size()) {}
  ComplexField1D(Grid1D grid, std::vector<cplx> values) : grid_(grid), values_(std::move(values)) {
    require(values_.size() == grid_.size(), Errc::invalid_argument, "field/grid size mismatch");
  }

  const Grid1D& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& v : values_) s += std::norm(v);
    return s * grid_.dx();
  }
  double norm() const { return std::sqrt(norm_squared()); }

  /// Scales to unit L2 norm and returns the norm it had before.
  double normalize() {
    const double n = norm();
    require(n > 0.0 && std::isfinite(n), Errc::numeric_overflow,
            "cannot normalize a field with norm " + std::to_string(n));
    for (auto& v : values_) v /= n;
    return n;
  }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](const cplx& v) {
      return std::isfinite(v.real()) && std::isfinite(v.imag());
    });
  }

  double max_abs2() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::norm(v));
    return m;
  }

  template <class F>
  static ComplexField1D from_function(const Grid1D& grid, F&& f) {
    ComplexField1D out(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) out.values_[i] = f(grid.x(i));
    return out;
  }

 private:
  Grid1D grid_;
  std::vector<cplx> values_;
};

inline double sup_distance(const ComplexField1D& a, const ComplexField1D& b) {
  require(a.size() == b.size(), Errc::invalid_argument, "fields differ in size");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Largest |psi|^2 within `edge_fraction` of either end of the grid. The
/// boundary watchdog compares this against 1e-10 to catch periodic wrap.
inline double boundary_density(const ComplexField1D& psi, double edge_fraction = 1.0 / 32.0) {
  const auto n = psi.size();
  const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(edge_fraction * static_cast<double>(n)));
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    worst = std::max({worst, std::norm(psi[i]), std::norm(psi[n - 1 - i])});
  return worst;
}

/// Gaussian packet whose density has standard deviation `sigma`:
/// (2 pi sigma^2)^(-1/4) exp(-(x-c)^2/(4 sigma^2) + i p x / hbar).
inline ComplexField1D gaussian_packet(const Grid1D& grid, double center, double sigma,
                                      double momentum = 0.0, double hbar = 1.0) {
  require(sigma > 0.0, Errc::invalid_argument, "gaussian width must be positive");
  const double amp = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
  return ComplexField1D::from_function(grid, [&](double x) {
    const double d = x - center;
    return amp * std::exp(cplx(-d * d / (4.0 * sigma * sigma), momentum * x / hbar));
  });
}

/// Two packets at -mu and +mu moving towards each other with speed v,
/// each of the form exp(-(x -/+ mu)^2/(2 sigma^2) +/- i M v x / hbar).
/// Normalized numerically on the grid.
inline ComplexField1D counter_propagating_pair(const Grid1D& grid, double mu, double sigma,
                                               double velocity, double mass = 1.0,
                                               double hbar = 1.0) {
  require(sigma > 0.0, Errc::invalid_argument, "packet width must be positive");
  const double k = mass * velocity / hbar;
  auto psi = ComplexField1D::from_function(grid, [&](double x) {
    const double l = x + mu, r = x - mu;
    return std::exp(cplx(-l * l / (2.0 * sigma * sigma), k * x)) +
           std::exp(cplx(-r * r / (2.0 * sigma * sigma), -k * x));
  });
  psi.normalize();
  return psi;
}

/// psi(x, y) on a product grid, row-major in x: values[ix * ny + iy].
class JointField2D {
 public:
  JointField2D(Grid1D gx, Grid1D gy) : gx_(gx), gy_(gy), values_(gx.size() * gy.size()) {}

  static JointField2D product(const ComplexField1D& fx, const ComplexField1D& fy) {
    JointField2D out(fx.grid(), fy.grid());
    for (std::size_t i = 0; i < fx.size(); ++i)
      for (std::size_t j = 0; j < fy.size(); ++j) out.at(i, j) = fx[i] * fy[j];
    return out;
  }

  const Grid1D& grid_x() const { return gx_; }
  const Grid1D& grid_y() const { return gy_; }
  cplx& at(std::size_t ix, std::size_t iy) { return values_[ix * gy_.size() + iy]; }
  const cplx& at(std::size_t ix, std::size_t iy) const { return values_[ix * gy_.size() + iy]; }
  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& v : values_) s += std::norm(v);
    return s * gx_.dx() * gy_.dx();
  }

  double normalize() {
    const double n = std::sqrt(norm_squared());
    require(n > 0.0 && std::isfinite(n), Errc::numeric_overflow, "cannot normalize joint field");
    for (auto& v : values_) v /= n;
    return n;
  }

  /// Marginal density of y, integral over x of |psi(x, y)|^2.
  RealField1D marginal_y() const {
    std::vector<double> m(gy_.size(), 0.0);
    for (std::size_t i = 0; i < gx_.size(); ++i)
      for (std::size_t j = 0; j < gy_.size(); ++j) m[j] += std::norm(at(i, j));
    for (auto& v : m) v *= gx_.dx();
    return {gy_, std::move(m)};
  }

  RealField1D marginal_x() const {
    std::vector<double> m(gx_.size(), 0.0);
    for (std::size_t i = 0; i < gx_.size(); ++i)
      for (std::size_t j = 0; j < gy_.size(); ++j) m[i] += std::norm(at(i, j));
    for (auto& v : m) v *= gy_.dx();
    return {gx_, std::move(m)};
  }

 private:
  Grid1D gx_;
  Grid1D gy_;
  std::vector<cplx> values_;
};

}  // namespace bohmgrw
