#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bohmgrw/error.hpp"
#include "bohmgrw/field.hpp"
#include "bohmgrw/grid.hpp"

namespace bohmgrw::com {

/// Actual positions of an N-particle system with its centre of mass and the
/// N-1 independent relative positions R_k = X_k - X_cm (k = 1..N-1).
struct ManyBodyConfig {
  std::vector<double> X;

  std::size_t N() const { return X.size(); }

  double X_cm() const {
    require(!X.empty(), Errc::invalid_argument, "configuration has no particles");
    double s = 0.0;
    for (double x : X) s += x;
    return s / static_cast<double>(X.size());
  }

  std::vector<double> R() const {
    const double cm = X_cm();
    std::vector<double> r(X.size() - 1);
    for (std::size_t k = 0; k + 1 < X.size(); ++k) r[k] = X[k] - cm;
    return r;
  }
};

struct ComSplit {
  double X_cm;
  std::vector<double> R;
};

inline ComSplit com_split(const ManyBodyConfig& config) {
  require(config.N() >= 1, Errc::invalid_argument, "need at least one particle");
  return {config.X_cm(), config.R()};
}

/// Positions x_k = x_cm + r_k, with the last relative coordinate fixed by
/// sum r_k = 0.
inline std::vector<double> com_join(double x_cm, std::span<const double> R) {
  std::vector<double> x(R.size() + 1);
  double sum = 0.0;
  for (std::size_t k = 0; k < R.size(); ++k) {
    x[k] = x_cm + R[k];
    sum += R[k];
  }
  x[R.size()] = x_cm - sum;
  return x;
}

/// Relative coordinate of particle k (1-based), including the dependent one.
inline double relative_coordinate(std::span<const double> R, std::size_t k) {
  if (k <= R.size()) return R[k - 1];
  double sum = 0.0;
  for (double r : R) sum += r;
  return -sum;
}

/// |lhs - rhs| for the rearrangement
///   Y_k(t) - g x_k = [Y0 + g (X_cm0 + R_k0 - r_k)] - g x_cm
/// with Y_k(t) = Y0 + g X_k0, X_k0 = X_cm0 + R_k0 and x_k = x_cm + r_k.
inline double exponent_identity_residual(double Y0, double X_cm0, double R_k0, double r_k, double x_cm, double g) {
  const double X_k0 = X_cm0 + R_k0;
  const double x_k = x_cm + r_k;
  const double lhs = (Y0 + g * X_k0) - g * x_k;
  const double rhs = (Y0 + g * (X_cm0 + R_k0 - r_k)) - g * x_cm;
  return std::abs(lhs - rhs);
}

/// N-body Gaussian psi(x) = exp(-x^T A x / 2 + b^T x) with A complex
/// symmetric and Re A positive definite. Unnormalized.
struct GaussianManyBody {
  Eigen::MatrixXcd A;
  Eigen::VectorXcd b;

  std::size_t N() const { return static_cast<std::size_t>(b.size()); }

  void validate() const {
    require(A.rows() == A.cols() && A.rows() == b.size() && b.size() >= 1, Errc::invalid_argument,
            "Gaussian state needs an N x N matrix and an N-vector");
    require(A.allFinite() && b.allFinite(), Errc::numeric_overflow, "non-finite Gaussian parameters");
    require((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + A.cwiseAbs().maxCoeff()),
            Errc::invalid_argument, "Gaussian precision matrix must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(A.real());
    require(llt.info() == Eigen::Success, Errc::invalid_argument,
            "real part of the Gaussian precision matrix must be positive definite");
  }

  cplx log_amplitude(std::span<const double> x) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) v(static_cast<Eigen::Index>(i)) = x[i];
    const Eigen::VectorXcd vc = v.cast<cplx>();
    return -0.5 * vc.dot(A * vc) + vc.dot(b);  // vc is real, so dot() conjugates nothing
  }

  cplx amplitude(std::span<const double> x) const { return std::exp(log_amplitude(x)); }

  /// Independent packets: particle k has density centre c_k and standard
  /// deviation s_k.
  static GaussianManyBody product(std::span<const double> centers, std::span<const double> widths) {
    require(centers.size() == widths.size() && !centers.empty(), Errc::invalid_argument,
            "need one width per centre");
    const auto n = static_cast<Eigen::Index>(centers.size());
    GaussianManyBody g{Eigen::MatrixXcd::Zero(n, n), Eigen::VectorXcd::Zero(n)};
    for (Eigen::Index k = 0; k < n; ++k) {
      const double s = widths[static_cast<std::size_t>(k)];
      require(s > 0.0, Errc::invalid_argument, "packet widths must be positive");
      g.A(k, k) = 1.0 / (2.0 * s * s);
      g.b(k) = centers[static_cast<std::size_t>(k)] / (2.0 * s * s);
    }
    return g;
  }

  /// Factorized state phi(x_cm) chi(r_1..r_N): phi has density centre c_cm and
  /// standard deviation s_cm; every relative coordinate r_k = x_k - x_cm has
  /// a Gaussian factor centred on offsets[k] (summing to zero) with width s_rel.
  static GaussianManyBody rigid_cluster(double c_cm, double s_cm, std::span<const double> offsets, double s_rel) {
    const auto N = offsets.size();
    require(N >= 1 && s_cm > 0.0 && s_rel > 0.0, Errc::invalid_argument,
            "rigid cluster needs particles and positive widths");
    double sum = 0.0;
    for (double d : offsets) sum += d;
    require(std::abs(sum) <= 1e-12 * static_cast<double>(N), Errc::invalid_argument,
            "cluster offsets must sum to zero");
    const auto n = static_cast<Eigen::Index>(N);
    const double dn = static_cast<double>(N);
    const Eigen::MatrixXd J = Eigen::MatrixXd::Ones(n, n) / dn;
    const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(n, n) - J;  // x -> r, a projector
    Eigen::VectorXd d(n);
    for (Eigen::Index k = 0; k < n; ++k) d(k) = offsets[static_cast<std::size_t>(k)];

    const double pc = 1.0 / (2.0 * s_cm * s_cm);
    const double pr = N > 1 ? 1.0 / (2.0 * s_rel * s_rel) : 0.0;
    const Eigen::MatrixXd A = pc * J / dn + pr * Q;
    const Eigen::VectorXd b = pc * c_cm * Eigen::VectorXd::Ones(n) / dn + pr * Q * d;
    return {A.cast<cplx>(), b.cast<cplx>()};
  }
};

/// psi_S(x_1..x_N) tabulated on a product grid (N <= 3), row-major with the
/// last particle fastest. Values off the grid are evaluated by band-limited
/// (trigonometric) interpolation inside the box and read as zero outside it.
class TabulatedManyBody {
 public:
  static constexpr std::size_t max_points = std::size_t{1} << 24;

  explicit TabulatedManyBody(std::vector<Grid1D> grids) : grids_(std::move(grids)) {
    require(!grids_.empty() && grids_.size() <= 3, Errc::invalid_argument,
            "tabulated states support 1 to 3 particles");
    std::size_t total = 1;
    for (const auto& g : grids_) {
      require(total <= max_points / g.size(), Errc::resource_limit, "tabulated state exceeds 2^24 points");
      total *= g.size();
    }
    values_.assign(total, cplx(0.0));
  }

  template <class F>
  static TabulatedManyBody from_function(std::vector<Grid1D> grids, F&& f) {
    TabulatedManyBody t(std::move(grids));
    std::vector<double> x(t.N());
    for (std::size_t flat = 0; flat < t.values_.size(); ++flat) {
      auto idx = t.unflatten(flat);
      for (std::size_t d = 0; d < t.N(); ++d) x[d] = t.grids_[d].x(idx[d]);
      t.values_[flat] = f(std::span<const double>(x));
    }
    return t;
  }

  std::size_t N() const { return grids_.size(); }
  const std::vector<Grid1D>& grids() const { return grids_; }
  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }

  std::vector<std::size_t> unflatten(std::size_t flat) const {
    std::vector<std::size_t> idx(N());
    for (std::size_t d = N(); d-- > 0;) {
      idx[d] = flat % grids_[d].size();
      flat /= grids_[d].size();
    }
    return idx;
  }

  /// Multiplies by m(x_k) along particle k (1-based).
  template <class M>
  void multiply_along(std::size_t k, M&& m) {
    require(k >= 1 && k <= N(), Errc::invalid_argument, "particle index out of range");
    const auto& g = grids_[k - 1];
    std::vector<double> factor(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) factor[i] = m(g.x(i));
    std::size_t stride = 1;
    for (std::size_t d = k; d < N(); ++d) stride *= grids_[d].size();
    for (std::size_t flat = 0; flat < values_.size(); ++flat) values_[flat] *= factor[(flat / stride) % g.size()];
  }

  cplx amplitude(std::span<const double> x) const {
    require(x.size() == N(), Errc::invalid_argument, "position count does not match particle count");
    std::vector<std::vector<double>> w(N());
    for (std::size_t d = 0; d < N(); ++d) {
      if (!grids_[d].contains(x[d])) return 0.0;
      w[d] = trig_weights(grids_[d], x[d]);
    }
    // Contract the last axis first: partial[flat / n_last] = sum_j w_last[j] values[flat].
    std::vector<cplx> partial(values_.begin(), values_.end());
    for (std::size_t d = N(); d-- > 0;) {
      const std::size_t n = grids_[d].size();
      std::vector<cplx> next(partial.size() / n, cplx(0.0));
      for (std::size_t o = 0; o < next.size(); ++o)
        for (std::size_t j = 0; j < n; ++j)
          if (w[d][j] != 0.0) next[o] += w[d][j] * partial[o * n + j];
      partial = std::move(next);
    }
    return partial[0];
  }

  /// Interpolation weights of the band-limited periodic interpolant at x
  /// (Nyquist mode split as a cosine). Exactly a delta at grid nodes.
  static std::vector<double> trig_weights(const Grid1D& g, double x) {
    const std::size_t M = g.size();
    std::vector<double> w(M, 0.0);
    const double s = (x - g.x_min()) / g.dx();
    const double near = std::round(s);
    if (std::abs(s - near) < 1e-13) {
      w[static_cast<std::size_t>(near) % M] = 1.0;
      return w;
    }
    const double m = static_cast<double>(M);
    for (std::size_t j = 0; j < M; ++j) {
      const double theta = 2.0 * std::numbers::pi * (s - static_cast<double>(j)) / m;
      const double dirichlet = std::sin((m - 1.0) * theta / 2.0) / std::sin(theta / 2.0);
      w[j] = (dirichlet + std::cos(m * theta / 2.0)) / m;
    }
    return w;
  }

 private:
  std::vector<Grid1D> grids_;
  std::vector<cplx> values_;
};

/// psi_cm(x_cm) = psi_S(x_cm, R_1..R_{N-1}) / norm on a centre-of-mass grid.
struct ComConditionalState {
  ComplexField1D field;
  std::vector<double> conditioned_on;
};

/// Closed form of the Gaussian slice: psi_cm(x) ~ exp(-a x^2 / 2 + beta x).
struct ComGaussian {
  cplx a;
  cplx beta;
  /// x_cm-independent part of the exponent; its imaginary part is the slice phase.
  cplx c0;

  double mean() const { return beta.real() / a.real(); }
  /// Standard deviation of |psi_cm|^2.
  double width() const { return std::sqrt(0.5 / a.real()); }
};

/// Substituting x = 1 x_cm + P r gives a = 1^T A 1 and beta = 1^T b - 1^T A P R,
/// where P maps r_1..r_{N-1} to all N relative coordinates.
inline ComGaussian com_gaussian(const GaussianManyBody& psi, std::span<const double> R) {
  psi.validate();
  const auto n = static_cast<Eigen::Index>(psi.N());
  require(R.size() + 1 == psi.N(), Errc::invalid_argument, "need N-1 relative positions");
  Eigen::VectorXcd r_all(n);
  for (Eigen::Index k = 0; k < n; ++k) r_all(k) = relative_coordinate(R, static_cast<std::size_t>(k) + 1);
  const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(n);
  const Eigen::VectorXcd A1 = psi.A * ones;
  return {ones.dot(A1), ones.dot(psi.b) - r_all.dot(A1), -0.5 * r_all.dot(psi.A * r_all) + r_all.dot(psi.b)};
}

namespace detail {

inline ComConditionalState finish_slice(ComplexField1D field, std::span<const double> R, const char* what) {
  const double n2 = field.norm_squared();
  if (!(n2 > 1e-14) || !std::isfinite(n2))
    throw Error(Errc::null_slice, std::string(what) + " vanishes on the centre-of-mass grid (norm^2 " +
                                      std::to_string(n2) + ")");
  field.normalize();
  return {std::move(field), std::vector<double>(R.begin(), R.end())};
}

}  // namespace detail

/// Analytic slice for a Gaussian state, any N. The grid must hold the packet.
inline ComConditionalState com_conditional(const GaussianManyBody& psi, std::span<const double> R, const Grid1D& grid_cm) {
  const auto cg = com_gaussian(psi, R);
  const double mu = cg.mean();
  const cplx shift((-0.5 * cg.a * mu * mu + cg.beta * mu).real(), -cg.c0.imag());
  auto f = ComplexField1D::from_function(
      grid_cm, [&](double x) { return std::exp(-0.5 * cg.a * x * x + cg.beta * x - shift); });
  return detail::finish_slice(std::move(f), R, "centre-of-mass slice");
}

/// Grid slice of a tabulated state (N <= 3).
inline ComConditionalState com_conditional(const TabulatedManyBody& psi, std::span<const double> R, const Grid1D& grid_cm) {
  require(R.size() + 1 == psi.N(), Errc::invalid_argument, "need N-1 relative positions");
  auto f = ComplexField1D::from_function(grid_cm, [&](double x) {
    const auto xs = com_join(x, R);
    return psi.amplitude(xs);
  });
  return detail::finish_slice(std::move(f), R, "centre-of-mass slice");
}

}  // namespace bohmgrw::com
