#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>

#include "bohmgrw/bohm/conditional.hpp"
#include "bohmgrw/csv.hpp"
#include "bohmgrw/field.hpp"
#include "bohmgrw/rng.hpp"
#include "bohmgrw/sampling.hpp"

namespace bohmgrw::bohm {

inline constexpr std::size_t max_density_grid = 256;

/// rho(x, x') sampled on grid x grid. Entries are kernel values, so the
/// trace is sum_i rho(x_i, x_i) dx.
struct DensityMatrix1D {
  Grid1D grid;
  Eigen::MatrixXcd values;

  explicit DensityMatrix1D(const Grid1D& g) : grid(g) {
    require(g.size() <= max_density_grid, Errc::resource_limit,
            "density matrices are limited to " + std::to_string(max_density_grid) + " grid points");
    values = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
  }

  static DensityMatrix1D pure(const ComplexField1D& psi) {
    DensityMatrix1D rho(psi.grid());
    const auto n = static_cast<Eigen::Index>(psi.size());
    Eigen::Map<const Eigen::VectorXcd> v(psi.values().data(), n);
    rho.values = v * v.adjoint();
    return rho;
  }

  double trace() const { return values.diagonal().real().sum() * grid.dx(); }
  double hermiticity_error() const { return (values - values.adjoint()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(values * grid.dx(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
  double max_deviation(const DensityMatrix1D& other) const { return (values - other.values).cwiseAbs().maxCoeff(); }

  /// Snapshot CSV: x,x_prime,re,im.
  void write(std::ostream& out) const {
    csv::Writer w(out, {"x", "x_prime", "re", "im"});
    for (Eigen::Index i = 0; i < values.rows(); ++i)
      for (Eigen::Index j = 0; j < values.cols(); ++j)
        w.row({grid.x(static_cast<std::size_t>(i)), grid.x(static_cast<std::size_t>(j)), values(i, j).real(),
               values(i, j).imag()});
  }
};

/// Partial trace over the environment coordinate.
inline DensityMatrix1D reduced_density_matrix(const JointField2D& joint) {
  DensityMatrix1D rho(joint.grid_x());
  const auto nx = static_cast<Eigen::Index>(joint.grid_x().size());
  const auto ny = static_cast<Eigen::Index>(joint.grid_y().size());
  // Row-major joint values viewed as an nx x ny matrix.
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> psi(
      joint.values().data(), nx, ny);
  rho.values = psi * psi.adjoint() * joint.grid_y().dx();
  return rho;
}

struct IdentityReport {
  double max_deviation;
  std::size_t env_samples;  // 0 means exact quadrature over the y grid
};

/// Compares the reduced density matrix with the environment average of the
/// conditional density matrix. With env_samples > 0 the environment
/// positions are drawn from the y marginal; with 0 the average is the exact
/// sum over y grid points weighted by the marginal.
inline IdentityReport reduced_vs_conditional_identity(const JointField2D& joint, std::size_t env_samples,
                                                      std::uint64_t seed = 0) {
  require(joint.grid_x().size() <= max_density_grid, Errc::resource_limit,
          "system grid too large for a density matrix");
  const auto reduced = reduced_density_matrix(joint);
  DensityMatrix1D average(joint.grid_x());
  const auto marginal = joint.marginal_y();
  const auto n = static_cast<Eigen::Index>(joint.grid_x().size());
  if (env_samples == 0) {
    for (std::size_t j = 0; j < joint.grid_y().size(); ++j) {
      // Slices at or below the null-slice threshold carry no weight here.
      if (marginal.values[j] <= 1e-14) continue;
      const double p = marginal.values[j] * joint.grid_y().dx();
      const auto c = conditional_wavefunction(joint, joint.grid_y().x(j));
      Eigen::Map<const Eigen::VectorXcd> v(c.field.values().data(), n);
      average.values += p * (v * v.adjoint());
    }
  } else {
    const DiscreteCdf cdf(marginal);
    auto rng = make_rng(seed, streams::readout);
    for (std::size_t s = 0; s < env_samples; ++s) {
      const auto c = conditional_wavefunction(joint, cdf.quantile(rng.uniform()));
      Eigen::Map<const Eigen::VectorXcd> v(c.field.values().data(), n);
      average.values += v * v.adjoint();
    }
    average.values /= static_cast<double>(env_samples);
  }
  return {reduced.max_deviation(average), env_samples};
}

}  // namespace bohmgrw::bohm
