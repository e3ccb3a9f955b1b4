#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "bohmgrw/error.hpp"
#include "bohmgrw/field.hpp"
#include "bohmgrw/rng.hpp"

namespace bohmgrw {

/// Cumulative distribution of a gridded density: trapezoid sums at the grid
/// nodes (x_max closes the last cell and carries the periodic image of
/// node 0), linear in between.
class DiscreteCdf {
 public:
  explicit DiscreteCdf(const RealField1D& rho) : x0_(rho.grid.x_min()), dx_(rho.grid.dx()) {
    const auto n = rho.values.size();
    cdf_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = rho.values[i], b = rho.values[(i + 1) % n];
      require(a >= 0.0 && std::isfinite(a), Errc::invalid_argument,
              "density must be finite and nonnegative");
      cdf_[i + 1] = cdf_[i] + 0.5 * (a + b) * dx_;
    }
    total_ = cdf_.back();
    require(total_ > 0.0, Errc::degenerate_distribution, "density integrates to zero");
    for (auto& c : cdf_) c /= total_;
    cdf_.back() = 1.0;
  }

  double total_mass() const { return total_; }

  double operator()(double x) const {
    const double s = (x - x0_) / dx_;
    if (s <= 0.0) return 0.0;
    const auto last = static_cast<double>(cdf_.size() - 1);
    if (s >= last) return 1.0;
    const auto i = static_cast<std::size_t>(s);
    const double f = s - static_cast<double>(i);
    return (1.0 - f) * cdf_[i] + f * cdf_[i + 1];
  }

  double quantile(double u) const {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return x0_;
    if (it == cdf_.end()) return x0_ + dx_ * static_cast<double>(cdf_.size() - 1);
    const auto i = static_cast<std::size_t>(it - cdf_.begin()) - 1;
    const double lo = cdf_[i], hi = cdf_[i + 1];
    const double f = hi > lo ? (u - lo) / (hi - lo) : 0.5;
    return x0_ + dx_ * (static_cast<double>(i) + f);
  }

 private:
  double x0_;
  double dx_;
  double total_ = 0.0;
  std::vector<double> cdf_;
};

/// n i.i.d. positions by inverse CDF.
inline std::vector<double> sample_from_density(const RealField1D& rho, Rng& rng, std::size_t n) {
  const DiscreteCdf cdf(rho);
  std::vector<double> out(n);
  for (auto& x : out) x = cdf.quantile(rng.uniform());
  return out;
}

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  require(!samples.empty(), Errc::invalid_argument, "KS needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), Errc::invalid_argument, "KS needs samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Asymptotic KS coefficients c(alpha) with D_crit = c / sqrt(n_eff).
inline constexpr double ks_c99 = 1.63;
inline constexpr double ks_c95 = 1.36;

inline double ks_critical(std::size_t n, double c = ks_c99) {
  return c / std::sqrt(static_cast<double>(n));
}

inline double ks_critical_two_sample(std::size_t n, std::size_t m, double c = ks_c95) {
  const double a = static_cast<double>(n), b = static_cast<double>(m);
  return c * std::sqrt((a + b) / (a * b));
}

struct KsReport {
  double statistic;
  double critical;
  std::size_t n;
  bool pass() const { return statistic < critical; }
};

}  // namespace bohmgrw
