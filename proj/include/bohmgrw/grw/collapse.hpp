#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "bohmgrw/csv.hpp"
#include "bohmgrw/field.hpp"
#include "bohmgrw/propagate.hpp"
#include "bohmgrw/rng.hpp"
#include "bohmgrw/sampling.hpp"

namespace bohmgrw::grw {

/// Per-particle collapse rate, localization width and particle count.
struct GrwParams {
  double lambda = 1.0;
  double r_C = 1.0;
  /// Kept real so Avogadro-scale counts are representable.
  double n_particles = 1.0;

  /// Effective centre-of-mass rate N * lambda.
  double rate() const { return n_particles * lambda; }

  /// lambda = 0 is accepted only where the caller asks for the no-collapse limit.
  void validate(bool allow_zero_rate = false) const {
    require(std::isfinite(lambda) && (allow_zero_rate ? lambda >= 0.0 : lambda > 0.0), Errc::invalid_argument,
            "collapse rate lambda must be positive");
    require(std::isfinite(r_C) && r_C > 0.0, Errc::invalid_argument, "localization width r_C must be positive");
    require(std::isfinite(n_particles) && n_particles >= 1.0, Errc::invalid_argument, "need at least one particle");
  }
};

inline double amplified_rate(const GrwParams& p) {
  p.validate();
  return p.rate();
}

/// Homogeneous Poisson process with exponential gaps drawn by inverse CDF.
class PoissonClock {
 public:
  PoissonClock(double rate, Rng rng, double t0 = 0.0) : rate_(rate), rng_(std::move(rng)) {
    require(rate >= 0.0 && std::isfinite(rate), Errc::invalid_argument, "Poisson rate must be non-negative");
    next_ = rate_ > 0.0 ? t0 + rng_.exponential(rate_) : std::numeric_limits<double>::infinity();
  }

  double rate() const { return rate_; }
  double next_event() const { return next_; }

  /// Returns the pending event time and schedules the one after it.
  double pop() {
    const double t = next_;
    next_ += rng_.exponential(rate_);
    return t;
  }

 private:
  double rate_;
  Rng rng_;
  double next_;
};

struct CollapseEvent {
  double time;
  double center;
  /// ||L(z) psi|| before renormalization.
  double pre_norm;
};

/// Gaussian localization multiplier (pi r^2)^(-1/4) exp(-(x-z)^2 / 2 r^2).
inline double localization_kernel(double x, double z, double r_C) {
  const double d = x - z;
  return std::pow(std::numbers::pi * r_C * r_C, -0.25) * std::exp(-d * d / (2.0 * r_C * r_C));
}

struct Localized {
  ComplexField1D field;
  double pre_norm;
};

inline Localized apply_localization(ComplexField1D psi, double z, double r_C) {
  require(r_C > 0.0, Errc::invalid_argument, "localization width must be positive");
  const auto& g = psi.grid();
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= localization_kernel(g.x(i), z, r_C);
  const double norm = psi.norm();
  if (!(norm >= 1e-14))
    throw Error(Errc::collapse_to_null,
                "localization at z=" + std::to_string(z) + " leaves norm " + std::to_string(norm));
  psi.normalize();
  return {std::move(psi), norm};
}

/// Density of collapse centres z -> ||L(z) psi||^2 on the field's grid:
/// |psi|^2 convolved with a Gaussian of variance r_C^2 / 2, truncated at
/// 10 r_C.
inline RealField1D collapse_center_pdf(const ComplexField1D& psi, double r_C) {
  const auto& g = psi.grid();
  const auto rho = probability_density(psi);
  const auto n = static_cast<long>(g.size());
  const long reach = static_cast<long>(std::ceil(10.0 * r_C / g.dx()));
  const double c = g.dx() / std::sqrt(std::numbers::pi * r_C * r_C);
  RealField1D out{g, std::vector<double>(g.size(), 0.0)};
  for (long j = 0; j < n; ++j) {
    const long lo = std::max(0L, j - reach), hi = std::min(n - 1, j + reach);
    double acc = 0.0;
    for (long i = lo; i <= hi; ++i) {
      const double d = static_cast<double>(i - j) * g.dx() / r_C;
      acc += rho.values[static_cast<std::size_t>(i)] * std::exp(-d * d);
    }
    out.values[static_cast<std::size_t>(j)] = c * acc;
  }
  return out;
}

/// Inverse-CDF sampler for repeated draws from one state.
class CollapseCenterSampler {
 public:
  CollapseCenterSampler(const ComplexField1D& psi, double r_C) : cdf_(collapse_center_pdf(psi, r_C)) {}
  double operator()(Rng& rng) const { return cdf_.quantile(rng.uniform()); }
  const DiscreteCdf& cdf() const { return cdf_; }

 private:
  DiscreteCdf cdf_;
};

inline double sample_collapse_center(const ComplexField1D& psi, double r_C, Rng& rng) {
  return CollapseCenterSampler(psi, r_C)(rng);
}

/// The two streams one GRW realization consumes.
struct GrwStreams {
  Rng clock;
  Rng centers;

  static GrwStreams for_run(std::uint64_t seed, std::uint64_t run) {
    return {make_rng(seed, streams::grw_clock, run), make_rng(seed, streams::grw_centers, run)};
  }
};

struct GrwOptions {
  UnitsContext units = UnitsContext::natural();
  /// Upper bound on the propagator step; the step actually used also
  /// satisfies dt <= 1e-3 / (N lambda).
  double max_dt = 1e-2;
  PropagateOptions propagate{};
  /// Called after each propagator step, before that step's collapses.
  std::function<void(const ComplexField1D&, double)> on_propagated{};
  /// Called after each collapse with the renormalized field.
  std::function<void(const ComplexField1D&, const CollapseEvent&)> on_collapse{};
  /// Called once per step boundary (including t = 0) after all collapses due there.
  std::function<void(const ComplexField1D&, long, double)> on_step{};
};

struct GrwRun {
  ComplexField1D psi;
  std::vector<CollapseEvent> events;
  double dt;
  long steps;
};

/// Step count and size for a run of length T: dt <= max_dt and, with
/// collapses on, dt <= 1e-3 times the mean gap between events.
inline std::pair<long, double> grw_stepping(double T, double rate, double max_dt) {
  require(T >= 0.0 && std::isfinite(T), Errc::invalid_argument, "duration must be non-negative");
  require(max_dt > 0.0, Errc::invalid_argument, "time step must be positive");
  double target = max_dt;
  if (rate > 0.0) target = std::min(target, 1e-3 / rate);
  if (T == 0.0) return {0, target};
  const long steps = std::max(1L, static_cast<long>(std::ceil(T / target - 1e-9)));
  return {steps, T / static_cast<double>(steps)};
}

/// Schrodinger evolution interrupted by localizations at the times of a
/// Poisson clock with rate N lambda. Each event is applied at the nearest
/// step boundary.
inline GrwRun evolve_grw(const ComplexField1D& psi0, const PotentialSpec& potential, const GrwParams& params,
                         double T, GrwStreams rng, const GrwOptions& opts = {}) {
  params.validate(true);
  require(psi0.all_finite(), Errc::numeric_overflow, "non-finite amplitude in initial field");
  const double rate = params.rate();
  require(rate * T <= 1e6, Errc::resource_limit, "more than 1e6 expected collapse events");
  const auto [steps, dt] = grw_stepping(T, rate, opts.max_dt);
  check_resolved(psi0, opts.propagate);

  GrwRun run{psi0, {}, dt, steps};
  const SplitStepPropagator prop(psi0.grid(), potential, opts.units, dt);
  PoissonClock clock(rate, std::move(rng.clock));

  auto collapse_due = [&](long s) {
    while (clock.next_event() <= T && std::lround(clock.next_event() / dt) == s) {
      const double t = clock.pop();
      try {
        const double z = sample_collapse_center(run.psi, params.r_C, rng.centers);
        auto hit = apply_localization(std::move(run.psi), z, params.r_C);
        run.psi = std::move(hit.field);
        run.events.push_back({t, z, hit.pre_norm});
        if (opts.on_collapse) opts.on_collapse(run.psi, run.events.back());
      } catch (const Error& e) {
        e.rethrow_with("collapse event at t=" + std::to_string(t));
      }
    }
  };

  collapse_due(0);
  if (opts.on_step) opts.on_step(run.psi, 0, 0.0);
  for (long s = 1; s <= steps; ++s) {
    prop.step(run.psi);
    check_boundary(run.psi, opts.propagate, "GRW evolution step " + std::to_string(s));
    if (opts.on_propagated) opts.on_propagated(run.psi, static_cast<double>(s) * dt);
    collapse_due(s);
    if (opts.on_step) opts.on_step(run.psi, s, static_cast<double>(s) * dt);
  }
  require(run.psi.all_finite(), Errc::numeric_overflow, "non-finite amplitude after GRW evolution");
  return run;
}

/// Event log: t,z,pre_norm.
inline void write_event_log(std::ostream& out, const std::vector<CollapseEvent>& events) {
  csv::Writer w(out, {"t", "z", "pre_norm"});
  for (const auto& e : events) w.row({e.time, e.center, e.pre_norm});
}

}  // namespace bohmgrw::grw
