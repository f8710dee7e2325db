#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fhn/lif.hpp"
#include "fhn/linearize.hpp"
#include "fhn/model.hpp"
#include "fhn/sde.hpp"

namespace fhn {

/// Probe points below the rest state on the vertical line L = {(v_e, w)}:
/// L_i = (v_e, w_e - i*delta), i = 0..n_points-1, with spacing delta derived
/// from the grid anchor constant -0.453 on the w axis.
struct FiringProbeGrid {
  double delta = 0.0;
  std::size_t n_points = 35;
  std::size_t trials_per_point = 1000;

  [[nodiscard]] static FiringProbeGrid for_params(const FhnParams& params, const FixedPoint& fp,
                                                  std::size_t trials_per_point = 1000);

  [[nodiscard]] double l(std::size_t i) const noexcept {
    return delta * static_cast<double>(i);
  }
  [[nodiscard]] Vec2 point(const FixedPoint& fp, std::size_t i) const noexcept {
    return {fp.v_e, fp.w_e - l(i)};
  }
};

/// First upward crossing of v = 0 in a stored 2-D trajectory.
[[nodiscard]] std::optional<Event> detect_spike(const Trajectory& trajectory);

struct FiringOptions {
  double h = 0.01;
  /// A trial ends at the earlier of: spike, one full revolution of X - X_e
  /// around the rest state (|unwound angle| reaching 2*pi), or this many
  /// deterministic rotation periods.
  double cap_periods = 3.0;
};

struct FiringProbRow {
  std::size_t i = 0;
  double l = 0.0;
  double p_hat = 0.0;
  double se = 0.0;
  std::size_t spikes = 0;
  std::size_t trials = 0;
};

/// Monte Carlo estimate of the probability of spiking within the first cycle
/// around the rest state, for every probe point of the grid. Trial k of
/// point i uses stream (firing, i, k) of `seed`, so single trials are
/// reproducible in isolation.
[[nodiscard]] std::vector<FiringProbRow> estimate_firing_prob(const FhnParams& params,
                                                              const FiringProbeGrid& grid,
                                                              std::uint64_t seed,
                                                              const FiringOptions& options = {});

/// Logistic fit p(l) = 1/(1 + exp((a - l)/b)) of a firing-probability table.
struct SigmoidFit {
  double a = 0.0;
  double b = 0.0;
  double a_star = 0.0;  // parameters mapped to rotation coordinates
  double b_star = 0.0;
  double sigma0 = 0.0;
  double residual = 0.0;  // final sum of squared residuals
  std::size_t iterations = 0;
  bool converged = false;
};

[[nodiscard]] double sigmoid_prob(const SigmoidFit& fit, double l) noexcept;

/// Damped Gauss-Newton least squares; converges when the step drops below
/// 1e-10 (or 200 iterations). Boundary probabilities 0 and 1 are legitimate
/// data points. Throws FitFailureError on degenerate tables.
[[nodiscard]] SigmoidFit fit_sigmoid(std::span<const double> l, std::span<const double> p_hat,
                                     double sigma0 = 0.0);
[[nodiscard]] SigmoidFit fit_sigmoid(std::span<const FiringProbRow> table, double sigma0 = 0.0);

/// Distance scale of the map x = (0, l) -> y = Q^-1 x; fills a_star/b_star.
[[nodiscard]] SigmoidFit transform_fit(const SigmoidFit& fit, const NormalForm& nf);

/// Firing intensity per unit time at radius r: one rotation takes 2*pi/nu,
/// so the per-cycle probability becomes the rate (nu/2*pi) * p*(r).
[[nodiscard]] double hazard_rate(const SigmoidFit& fit, double nu, double r);

struct DensityPoint {
  double t = 0.0;
  double g = 0.0;
  double se = 0.0;
};

/// Monte Carlo first-firing-time density of a radial model with the fitted
/// hazard: g(t) = E[alpha(R_t) exp(-integral_0^t alpha(R_s) ds)], with the
/// inner integral approximated by an n-subinterval trapezoid along each of M
/// simulated R paths started at the reset state.
[[nodiscard]] std::vector<DensityPoint> isi_density(const LifModel& model, const SigmoidFit& fit,
                                                    std::span<const double> t_grid, std::size_t M,
                                                    std::size_t n, std::uint64_t seed,
                                                    double h = 0.01);

/// Evenly spaced density grid over [0, t_max].
[[nodiscard]] std::vector<double> density_time_grid(double t_max = 3000.0,
                                                    std::size_t n_points = 150);

/// Trapezoid mass of a density curve.
[[nodiscard]] double density_mass(std::span<const DensityPoint> density);

struct IsiOptions {
  double h = 0.01;
  double t_max = 1e5;  // per-trial censoring horizon
};

struct IsiSample {
  std::vector<double> isis;  // first-firing times of uncensored trials
  std::size_t censored = 0;
  double t_max = 0.0;
};

/// First-firing times of `n_trials` independent restarts from the rest state
/// (the post-spike reset point). Trial k uses stream (isi_empirical, 0, k).
[[nodiscard]] IsiSample isi_histogram(const FhnParams& params, std::size_t n_trials,
                                      std::uint64_t seed, const IsiOptions& options = {});

/// Sup distance between the sample CDF (censored trials count as mass beyond
/// the grid) and the numerically integrated CDF of a density curve,
/// evaluated at grid points and sample jump points.
[[nodiscard]] double ks_distance(const IsiSample& sample, std::span<const DensityPoint> density);

/// Sup distance between the integrated CDFs of two densities on one grid.
[[nodiscard]] double ks_distance(std::span<const DensityPoint> d1,
                                 std::span<const DensityPoint> d2);

/// Full comparison: empirical sample vs both radial-model densities.
struct IsiResult {
  IsiSample sample;
  std::vector<DensityPoint> density_radial_ou;
  std::vector<DensityPoint> density_polar;
  std::size_t M = 0;
  std::size_t n = 0;
  SigmoidFit fit;
  double ks_empirical_radial_ou = 0.0;
  double ks_empirical_polar = 0.0;
  double ks_models = 0.0;
  double mass_radial_ou = 0.0;
  double mass_polar = 0.0;
};

struct IsiComparisonOptions {
  std::size_t n_trials = 1000;  // empirical restarts
  std::size_t M = 1000;         // density MC paths
  std::size_t n = 10;           // trapezoid subintervals
  double t_max = 3000.0;        // density grid end
  std::size_t grid_points = 150;
  double h = 0.01;
  std::size_t firing_trials = 1000;  // trials per probe point for the fit
};

[[nodiscard]] IsiResult run_isi_comparison(const FhnParams& params, std::uint64_t seed,
                                           const IsiComparisonOptions& options = {});

}  // namespace fhn
