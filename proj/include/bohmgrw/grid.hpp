#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "bohmgrw/error.hpp"

namespace bohmgrw {

/// Uniform periodic grid on [x_min, x_max). Point i sits at x_min + i*dx and
/// x_max is identified with x_min; every module uses this convention.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t n) : x_min_(x_min), x_max_(x_max), n_(n) {
    require(n >= 8 && (n & (n - 1)) == 0, Errc::invalid_argument,
            "grid size must be a power of two >= 8, got " + std::to_string(n));
    require(std::isfinite(x_min) && std::isfinite(x_max) && x_max > x_min, Errc::invalid_argument,
            "grid bounds must be finite with x_max > x_min");
    dx_ = (x_max - x_min) / static_cast<double>(n);
  }

  /// Symmetric grid [-half_width, half_width).
  static Grid1D centered(double half_width, std::size_t n) { return {-half_width, half_width, n}; }

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t size() const { return n_; }
  double dx() const { return dx_; }
  double length() const { return x_max_ - x_min_; }
  double x(std::size_t i) const { return x_min_ + static_cast<double>(i) * dx_; }

  /// Angular wavenumber of FFT bin i (standard FFT ordering).
  double k(std::size_t i) const {
    const double dk = 2.0 * std::numbers::pi / length();
    const auto half = n_ / 2;
    return i < half ? dk * static_cast<double>(i)
                    : dk * (static_cast<double>(i) - static_cast<double>(n_));
  }
  double k_nyquist() const { return std::numbers::pi / dx_; }

  std::vector<double> points() const {
    std::vector<double> xs(n_);
    for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
    return xs;
  }

  bool contains(double x) const { return x >= x_min_ && x < x_max_; }

  friend bool operator==(const Grid1D& a, const Grid1D& b) {
    return a.x_min_ == b.x_min_ && a.x_max_ == b.x_max_ && a.n_ == b.n_;
  }

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  double dx_;
};

enum class UnitMode { natural, si };

struct UnitsContext {
  double hbar = 1.0;
  double mass = 1.0;
  UnitMode mode = UnitMode::natural;

  static UnitsContext natural() { return {}; }
  static UnitsContext si(double mass_kg);

  void validate() const {
    require(hbar > 0.0 && mass > 0.0 && std::isfinite(hbar) && std::isfinite(mass),
            Errc::invalid_argument, "hbar and mass must be positive and finite");
  }
};

namespace si {
inline constexpr double hbar = 1.054571817e-34;   // J s
inline constexpr double k_boltzmann = 1.380649e-23;  // J/K
}  // namespace si

inline UnitsContext UnitsContext::si(double mass_kg) { return {si::hbar, mass_kg, UnitMode::si}; }

/// External potential V(x). Linear is slope*x, harmonic is k*x^2/2, both
/// centred at the origin; tabulated samples live on a specific grid.
class PotentialSpec {
 public:
  struct Free {};
  struct Linear { double slope; };
  struct Harmonic { double k; };
  struct Tabulated { Grid1D grid; std::vector<double> samples; };

  PotentialSpec() : kind_(Free{}) {}
  static PotentialSpec free() { return {}; }
  static PotentialSpec linear(double slope) {
    require(std::isfinite(slope), Errc::invalid_argument, "linear slope must be finite");
    return PotentialSpec(Linear{slope});
  }
  static PotentialSpec harmonic(double k) {
    require(std::isfinite(k), Errc::invalid_argument, "harmonic constant must be finite");
    return PotentialSpec(Harmonic{k});
  }
  static PotentialSpec tabulated(const Grid1D& grid, std::vector<double> samples) {
    require(samples.size() == grid.size(), Errc::invalid_argument,
            "tabulated potential must have one sample per grid point");
    for (double v : samples)
      require(std::isfinite(v), Errc::invalid_argument, "tabulated potential must be finite");
    return PotentialSpec(Tabulated{grid, std::move(samples)});
  }

  bool is_free() const { return std::holds_alternative<Free>(kind_); }

  std::string name() const {
    struct V {
      std::string operator()(const Free&) const { return "free"; }
      std::string operator()(const Linear&) const { return "linear"; }
      std::string operator()(const Harmonic&) const { return "harmonic"; }
      std::string operator()(const Tabulated&) const { return "tabulated"; }
    };
    return std::visit(V{}, kind_);
  }

  double value(double x) const {
    if (const auto* l = std::get_if<Linear>(&kind_)) return l->slope * x;
    if (const auto* h = std::get_if<Harmonic>(&kind_)) return 0.5 * h->k * x * x;
    if (const auto* t = std::get_if<Tabulated>(&kind_)) return lerp_table(*t, t->samples, x);
    return 0.0;
  }

  double gradient(double x) const {
    if (const auto* l = std::get_if<Linear>(&kind_)) return l->slope;
    if (const auto* h = std::get_if<Harmonic>(&kind_)) return h->k * x;
    if (const auto* t = std::get_if<Tabulated>(&kind_)) {
      const auto n = t->samples.size();
      std::vector<double> d(n);
      for (std::size_t i = 0; i < n; ++i)
        d[i] = (t->samples[(i + 1) % n] - t->samples[(i + n - 1) % n]) / (2.0 * t->grid.dx());
      return lerp_table(*t, d, x);
    }
    return 0.0;
  }

  double curvature(double x) const {
    if (const auto* h = std::get_if<Harmonic>(&kind_)) return h->k;
    if (std::holds_alternative<Tabulated>(kind_)) {
      const double h = 1e-4;
      return (gradient(x + h) - gradient(x - h)) / (2.0 * h);
    }
    (void)x;
    return 0.0;
  }

  std::vector<double> sample(const Grid1D& grid) const {
    if (const auto* t = std::get_if<Tabulated>(&kind_)) {
      require(t->grid == grid, Errc::invalid_argument,
              "tabulated potential sampled on a different grid");
      return t->samples;
    }
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = value(grid.x(i));
    return v;
  }

 private:
  using Kind = std::variant<Free, Linear, Harmonic, Tabulated>;
  explicit PotentialSpec(Kind k) : kind_(std::move(k)) {}

  static double lerp_table(const Tabulated& t, const std::vector<double>& ys, double x) {
    const double s = (x - t.grid.x_min()) / t.grid.dx();
    const auto n = static_cast<long>(ys.size());
    const long i0 = static_cast<long>(std::floor(s));
    const double frac = s - static_cast<double>(i0);
    auto at = [&](long i) { return ys[static_cast<std::size_t>(((i % n) + n) % n)]; };
    return (1.0 - frac) * at(i0) + frac * at(i0 + 1);
  }

  Kind kind_;
};

}  // namespace bohmgrw
