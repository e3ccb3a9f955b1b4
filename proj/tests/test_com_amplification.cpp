#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "bohmgrw/bath/collision.hpp"
#include "bohmgrw/bath/multi_collision.hpp"
#include "bohmgrw/com/amplification.hpp"
#include "bohmgrw/com/collision.hpp"
#include "bohmgrw/com/many_body.hpp"
#include "bohmgrw/grw/collapse.hpp"

using namespace bohmgrw;
using namespace bohmgrw::com;

namespace {

// Normalized density-Gaussian amplitude, independent of the library.
cplx packet(double x, double c, double s, double k = 0.0) {
  return std::pow(2.0 * std::numbers::pi * s * s, -0.25) * std::exp(cplx(-(x - c) * (x - c) / (4.0 * s * s), k * x));
}

// Aligns the global phase of b to a at their largest common entry.
double sup_up_to_phase(const ComplexField1D& a, const ComplexField1D& b) {
  std::size_t im = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i]) > std::abs(a[im])) im = i;
  const cplx phase = (a[im] / std::abs(a[im])) / (b[im] / std::abs(b[im]));
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - phase * b[i]));
  return m;
}

double density_mean(const ComplexField1D& psi) {
  double s = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) s += psi.grid().x(i) * std::norm(psi[i]);
  return s * psi.grid().dx();
}

double density_variance(const ComplexField1D& psi) {
  const double mu = density_mean(psi);
  double s = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) s += std::pow(psi.grid().x(i) - mu, 2) * std::norm(psi[i]);
  return s * psi.grid().dx();
}

}  // namespace

TEST(ComSplit, TwoParticles) {
  const auto s = com_split({{-1.0, 1.0}});
  EXPECT_EQ(s.X_cm, 0.0);
  ASSERT_EQ(s.R.size(), 1u);
  EXPECT_EQ(s.R[0], -1.0);
}

TEST(ComSplit, EqualPositionsHaveZeroRelatives) {
  const auto s = com_split({{2.5, 2.5, 2.5, 2.5}});
  EXPECT_EQ(s.X_cm, 2.5);
  for (double r : s.R) EXPECT_EQ(r, 0.0);
}

TEST(ComSplit, SingleParticle) {
  const auto s = com_split({{0.7}});
  EXPECT_EQ(s.X_cm, 0.7);
  EXPECT_TRUE(s.R.empty());
}

TEST(ComSplit, RoundTripProperty) {
  auto rng = make_rng(5, streams::misc);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t N = 1 + rng.below(8);
    ManyBodyConfig c{std::vector<double>(N)};
    for (auto& x : c.X) x = rng.uniform(-5.0, 5.0);
    const auto s = com_split(c);
    const auto back = com_join(s.X_cm, s.R);
    double sum = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      EXPECT_LT(std::abs(back[k] - c.X[k]), 1e-14);
      sum += c.X[k];
    }
    EXPECT_EQ(s.X_cm, sum / static_cast<double>(N));
  }
}

TEST(ExponentIdentity, RandomizedTuples) {
  auto rng = make_rng(7, streams::misc);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double Y0 = rng.uniform(-10, 10), Xcm = rng.uniform(-10, 10), Rk = rng.uniform(-3, 3),
                 rk = rng.uniform(-3, 3), xcm = rng.uniform(-10, 10), g = rng.uniform(0, 1);
    worst = std::max(worst, exponent_identity_residual(Y0, Xcm, Rk, rk, xcm, g));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(GaussianManyBody, RejectsIndefiniteMatrix) {
  GaussianManyBody g{Eigen::MatrixXcd::Identity(2, 2), Eigen::VectorXcd::Zero(2)};
  g.A(1, 1) = -1.0;
  try {
    g.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_argument);
  }
}

TEST(GaussianManyBody, RigidClusterFactorizes) {
  // psi(x) = phi(x_cm) chi(r): the exponent must equal the cm/relative form.
  const std::vector<double> d{-1.0, 0.25, 0.75};
  const auto psi = GaussianManyBody::rigid_cluster(0.3, 1.5, d, 0.2);
  auto rng = make_rng(2, streams::misc);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const double xcm = (x[0] + x[1] + x[2]) / 3.0;
    double expo = -(xcm - 0.3) * (xcm - 0.3) / (4 * 1.5 * 1.5);
    for (int k = 0; k < 3; ++k) expo -= std::pow(x[k] - xcm - d[k], 2) / (4 * 0.2 * 0.2);
    const double ref = -(0.3 * 0.3) / (4 * 1.5 * 1.5);  // constant of the cm factor
    double cst = ref;
    for (int k = 0; k < 3; ++k) cst -= d[k] * d[k] / (4 * 0.2 * 0.2);
    EXPECT_NEAR(psi.log_amplitude(x).real(), expo - cst, 1e-10);
  }
}

TEST(ComConditional, FactorizedStateGivesComFactorForAnyR) {
  const Grid1D g = Grid1D::centered(16, 256);
  const auto psi = GaussianManyBody::rigid_cluster(0.5, 1.2, std::vector<double>{-1, 0, 1}, 0.3);
  const auto phi = ComplexField1D::from_function(g, [](double x) { return packet(x, 0.5, 1.2); });
  for (auto R : {std::vector<double>{-1, 0}, std::vector<double>{-3, 2}, std::vector<double>{0.4, -0.9}}) {
    const auto cm = com_conditional(psi, R, g);
    EXPECT_LT(sup_distance(cm.field, phi), 1e-10);
    EXPECT_EQ(cm.conditioned_on, R);
  }
}

TEST(ComConditional, SingleParticleIsTheWaveFunction) {
  const Grid1D g = Grid1D::centered(10, 128);
  const auto psi1 = TabulatedManyBody::from_function({g}, [](std::span<const double> x) { return packet(x[0], 1, 0.8, 2); });
  const auto cm = com_conditional(psi1, std::vector<double>{}, g);
  auto ref = ComplexField1D::from_function(g, [](double x) { return packet(x, 1, 0.8, 2); });
  ref.normalize();
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(cm.field[i], ref[i]);

  const double c = 1.0, s = 0.8;
  GaussianManyBody gm{Eigen::MatrixXcd::Constant(1, 1, 1.0 / (2 * s * s)),
                      Eigen::VectorXcd::Constant(1, cplx(c / (2 * s * s), 2.0))};
  EXPECT_LT(sup_up_to_phase(com_conditional(gm, std::vector<double>{}, g).field, ref), 1e-12);
}

TEST(ComConditional, EntangledTwoLobeSelectsLobe) {
  // psi = phi_L(x_cm) chi_L(r) + phi_R(x_cm) chi_R(r) with disjoint chi supports;
  // for N = 2, r = (x1 - x2)/2 and x1 = x_cm + r, x2 = x_cm - r.
  const Grid1D g = Grid1D::centered(16, 128);
  auto f = [](std::span<const double> x) {
    const double xcm = 0.5 * (x[0] + x[1]), r = 0.5 * (x[0] - x[1]);
    return packet(xcm, -3, 0.8, 1.0) * packet(r, -2.5, 0.4) + packet(xcm, 3, 0.6) * packet(r, 2.5, 0.4);
  };
  const auto psi = TabulatedManyBody::from_function({g, g}, f);
  const Grid1D gcm = Grid1D::centered(12, 256);
  const auto left = com_conditional(psi, std::vector<double>{-2.3}, gcm);
  const auto phiL = ComplexField1D::from_function(gcm, [](double x) { return packet(x, -3, 0.8, 1.0); });
  EXPECT_LT(sup_up_to_phase(left.field, phiL), 1e-6);
  const auto right = com_conditional(psi, std::vector<double>{2.61}, gcm);
  const auto phiR = ComplexField1D::from_function(gcm, [](double x) { return packet(x, 3, 0.6); });
  EXPECT_LT(sup_up_to_phase(right.field, phiR), 1e-6);
}

TEST(ComConditional, TabulatedOracleAgreesWithGaussianN3) {
  const Grid1D g = Grid1D::centered(8, 64);
  const std::vector<double> c{-1.0, 0.5, 1.5}, s{0.7, 0.8, 0.75};
  auto gm = GaussianManyBody::product(c, s);
  gm.b(1) += cplx(0, 1.0);  // a moving packet
  gm.A(0, 1) = gm.A(1, 0) = 0.1;  // and a correlation
  const auto tab = TabulatedManyBody::from_function({g, g, g}, [&](std::span<const double> x) { return gm.amplitude(x); });
  const Grid1D gcm = Grid1D::centered(6, 128);
  const std::vector<double> R{-1.2, 0.1};
  const auto a = com_conditional(gm, R, gcm);
  const auto b = com_conditional(tab, R, gcm);
  EXPECT_LT(sup_distance(a.field, b.field), 1e-6);
}

TEST(ComConditional, NullSlice) {
  const Grid1D g = Grid1D::centered(8, 64);
  const auto tab = TabulatedManyBody::from_function(
      {g, g}, [](std::span<const double> x) { return packet(x[0], 0, 0.5) * packet(x[1], 0, 0.5); });
  try {
    com_conditional(tab, std::vector<double>{30.0}, Grid1D::centered(8, 64));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::null_slice);
  }
  // A Gaussian whose slice sits far outside the centre-of-mass grid.
  const auto gm = GaussianManyBody::rigid_cluster(500, 0.5, std::vector<double>{-1, 1}, 0.3);
  EXPECT_THROW(com_conditional(gm, std::vector<double>{-1}, g), Error);
}

TEST(ComConditional, TabulatedSizeLimits) {
  const Grid1D g = Grid1D::centered(8, 8);
  EXPECT_THROW(TabulatedManyBody({g, g, g, g}), Error);
  const Grid1D big = Grid1D::centered(8, 1 << 9);
  try {
    TabulatedManyBody t({big, big, big});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::resource_limit);
  }
}

TEST(ComCollision, SingleParticleReducesToConditionalPair) {
  const Grid1D g = Grid1D::centered(12, 256), gy = Grid1D::centered(12, 256);
  auto f = [](double x) { return packet(x, -2, 0.7, 0.5) + packet(x, 2, 0.7, -0.5); };
  ComplexField1D psi_S = ComplexField1D::from_function(g, f);
  psi_S.normalize();
  TabulatedManyBody tab({g});
  std::copy(psi_S.values().begin(), psi_S.values().end(), tab.values().begin());
  const double sigma = 0.6, X0 = 1.7, Y0 = -0.4, a = 0.8;
  const auto w = bath::InteractionWindow::instantaneous(0.0);
  const auto pair = bath::conditional_pair(psi_S, gy, sigma, X0, Y0, w, 0.0, a);
  const auto hit = collision_on_particle_k(tab, ManyBodyConfig{{X0}}, {1, Y0, sigma, a}, w, 0.0, g);
  EXPECT_EQ(hit.Y_k, pair.system.conditioning_point);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(hit.conditional.field[i], pair.system.field[i]);

  // Gaussian single-particle state against the same closed form.
  GaussianManyBody gm{Eigen::MatrixXcd::Constant(1, 1, 1.0 / (2 * 0.49)), Eigen::VectorXcd::Constant(1, 0.0)};
  ComplexField1D gpsi = ComplexField1D::from_function(g, [](double x) { return packet(x, 0, 0.7); });
  const auto gpair = bath::conditional_pair(gpsi, gy, sigma, X0, Y0, w, 0.0, a);
  const auto ghit = collision_on_particle_k(gm, ManyBodyConfig{{X0}}, {1, Y0, sigma, a}, w, 0.0, g);
  EXPECT_LT(sup_up_to_phase(ghit.conditional.field, gpair.system.field), 1e-12);
}

TEST(ComCollision, RigidClusterHitOnSecondParticle) {
  const Grid1D g = Grid1D::centered(16, 512);
  const double c = 0.5, s = 2.0, sigma = 0.5, Y0 = 0.3;
  const auto psi = GaussianManyBody::rigid_cluster(c, s, std::vector<double>{-1, 0, 1}, 0.2);
  const ManyBodyConfig X0{{-1.1, 0.05, 0.9}};
  const double Xcm0 = (-1.1 + 0.05 + 0.9) / 3.0;
  const auto hit = collision_on_particle_k(psi, X0, {2, Y0, sigma, 0.0}, bath::InteractionWindow::instantaneous(0.0), 0.0, g);

  EXPECT_LT(hit.identity_residual, 1e-12);
  EXPECT_NEAR(hit.Y_cm, Y0 + Xcm0, 1e-15);
  EXPECT_LT(sup_up_to_phase(hit.conditional.field, hit.com_law.field), 1e-8);

  // Single-particle law: localization kernel of width sqrt(2) sigma at X_cm0 + Y0.
  const auto before = com_conditional(psi, X0.R(), g);
  const auto single = grw::apply_localization(before.field, Xcm0 + Y0, std::sqrt(2.0) * sigma);
  EXPECT_LT(sup_up_to_phase(hit.com_law.field, single.field), 1e-12);

  // Product of N(c, s^2) with N(Y_cm, sigma^2) in density.
  const double prec = 1 / (s * s) + 1 / (sigma * sigma);
  EXPECT_NEAR(density_mean(hit.conditional.field), (c / (s * s) + hit.Y_cm / (sigma * sigma)) / prec, 1e-8);
  EXPECT_NEAR(density_variance(hit.conditional.field), 1 / prec, 1e-8);

  // The system particles do not move.
  EXPECT_EQ(hit.config.X, X0.X);
}

TEST(ComCollision, TabulatedOracleAgreesN3) {
  const Grid1D g = Grid1D::centered(8, 64);
  const auto gm = GaussianManyBody::rigid_cluster(0.2, 1.0, std::vector<double>{-1, 0, 1}, 0.5);
  const auto tab = TabulatedManyBody::from_function({g, g, g}, [&](std::span<const double> x) { return gm.amplitude(x); });
  const ManyBodyConfig X0{{-0.9, 0.1, 1.2}};
  const Grid1D gcm = Grid1D::centered(6, 128);
  const ParticleCollision hit{3, -0.4, 0.6, 0.0};
  const bath::InteractionWindow w{0.0, 1.0};
  const auto a = collision_on_particle_k(gm, X0, hit, w, 0.7, gcm);
  const auto b = collision_on_particle_k(tab, X0, hit, w, 0.7, gcm);
  EXPECT_LT(sup_distance(a.conditional.field, b.conditional.field), 1e-6);
  EXPECT_LT(sup_distance(b.conditional.field, b.com_law.field), 1e-6);
}

TEST(ComCollision, ComLawPropertyRandomized) {
  const Grid1D g = Grid1D::centered(20, 512);
  auto rng = make_rng(11, streams::misc);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t N = 1 + rng.below(6);
    std::vector<double> d(N);
    for (std::size_t k = 0; k < N; ++k) d[k] = static_cast<double>(k) - 0.5 * static_cast<double>(N - 1);
    auto psi = GaussianManyBody::rigid_cluster(rng.uniform(-2, 2), rng.uniform(0.8, 3), d, rng.uniform(0.1, 0.5));
    ManyBodyConfig X{d};
    for (auto& x : X.X) x += rng.uniform(-0.2, 0.2);
    const auto R0 = X.R();
    const double Xcm0 = X.X_cm();
    // A sequence of hits: the relative positions and X_cm never move.
    for (int hitno = 0; hitno < 5; ++hitno) {
      const ParticleCollision hit{1 + rng.below(N), rng.normal(), rng.uniform(0.3, 1.5), rng.uniform(-1, 1)};
      const double t = rng.uniform(0, 1);
      const auto out = collision_on_particle_k(psi, X, hit, bath::InteractionWindow{0.0, 1.0}, t, g);
      EXPECT_LT(out.identity_residual, 1e-12);
      EXPECT_LT(sup_up_to_phase(out.conditional.field, out.com_law.field), 1e-8) << "trial " << trial;
      EXPECT_EQ(out.config.R(), R0);
      EXPECT_EQ(out.config.X_cm(), Xcm0);
      psi = out.state;
      X = out.config;
    }
  }
}

TEST(Amplification, SingleParticleRateIsLambda) {
  const auto rep = measure_amplification({1}, 1.0, 400, 3);
  ASSERT_EQ(rep.rows.size(), 1u);
  const double poisson_sd = std::sqrt(1.0 * 10.0 * 400) / (10.0 * 400);
  EXPECT_LT(std::abs(rep.rows[0].fitted_rate - 1.0), 3 * poisson_sd);
}

TEST(Amplification, SlopeIsOne) {
  const auto rep = measure_amplification({1, 2, 4, 8}, 1.0, 200, 17);
  EXPECT_NEAR(rep.slope, 1.0, 0.1);
  EXPECT_NEAR(rep.intercept, 0.0, 0.5);
  std::ostringstream os;
  rep.write(os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "N,fitted_rate,stderr");
}

TEST(Amplification, TenParticlesMeanCount) {
  const auto rep = measure_amplification({10}, 1.0, 100, 23);
  EXPECT_NEAR(rep.rows[0].mean_count, 100.0, 10.0);
}

TEST(Amplification, SingleParticleSeesBathArrivals) {
  const Grid1D g = Grid1D::centered(40, 512);
  const auto psi = gaussian_packet(g, 0.0, 1.0);
  bath::BathParticleSpec spec{1.0, 0.0, 1.0};
  bath::MultiCollisionOptions mo;
  mo.record_path = false;
  mo.start = 0.0;
  AmplificationOptions ao;
  ao.T = 3.0;
  for (std::uint64_t run = 0; run < 5; ++run) {
    const auto mc = bath::multi_collision_run(psi, PotentialSpec::free(), spec, 3.0, 9, run, mo);
    EXPECT_EQ(count_com_localizations(1, 1.0, 9, run, ao), mc.collisions.size()) << "run " << run;
  }
}

TEST(Amplification, RejectsTooFewRuns) {
  try {
    measure_amplification({1}, 1.0, 50, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_argument);
  }
}

TEST(Amplification, DeterministicForSeed) {
  const auto a = measure_amplification({3}, 0.5, 100, 99);
  const auto b = measure_amplification({3}, 0.5, 100, 99);
  EXPECT_EQ(a.rows[0].counts, b.rows[0].counts);
}
