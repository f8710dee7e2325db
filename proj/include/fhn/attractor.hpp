#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fhn/brownian.hpp"
#include "fhn/model.hpp"
#include "fhn/sde.hpp"

namespace fhn {

/// Discretized stationary solution of the scalar equation
/// dz = -decay * z dt + sigma dB, approximated by integrating from 0 over a
/// burn-in window before the retained samples start.
struct StationaryOuPath {
  double t0 = 0.0;
  double dt = 0.01;
  double burn_in = 0.0;
  double sigma = 0.0;
  double decay = 1.0;
  std::vector<double> z;  // sample k taken at t0 + k*dt

  [[nodiscard]] double time_at(std::size_t k) const noexcept {
    return t0 + dt * static_cast<double>(k);
  }
  [[nodiscard]] double t_end() const noexcept {
    return z.empty() ? t0 : time_at(z.size() - 1);
  }
};

/// Stationary scalar OU samples on [t0, t1]; the burn-in segment
/// [t0 - burn_in, t0] is integrated and discarded. All increments come from
/// one Brownian stream based at t0 - burn_in.
[[nodiscard]] StationaryOuPath stationary_ou(std::uint64_t seed, std::uint64_t stream_id,
                                             double dt, double t0, double t1, double sigma,
                                             double burn_in = 10.0, double decay = 1.0);

/// Time-shift of a Brownian path: theta_s m = m(s + .) - m(s). On the grid
/// this drops the first s/dt increments; the result is re-based so its time
/// origin corresponds to time s of the original (t0 is kept). s must be a
/// nonnegative grid multiple within the path.
[[nodiscard]] BrownianPath wiener_shift(const BrownianPath& path, double s);

/// Max norm deviation of the cocycle identity
///   phi(t+s, omega) x0  vs  phi(t, theta_s omega) . phi(s, omega) x0
/// on one path. Grid-aligned t, s; both legs use the one-step map of the
/// integrator, so the deviation is pure floating-point accumulation.
[[nodiscard]] double cocycle_check(const FhnParams& params, const Vec2& x0,
                                   const BrownianPath& path, double t, double s);

/// Truncated quadrature of the absorption radius for additive noise:
///   R* = integral_{-inf}^0 [2a + (1/b)|F(eta_s) + eta_s|^2] e^{b s} ds
/// with eta_s = (0, z_s) and (a, b) the dissipativity constants.
struct AbsorptionRadius {
  double r_star = 0.0;
  double tail_bound = 0.0;  // bound on the truncated-tail contribution
  double window = 0.0;      // quadrature window length
};

[[nodiscard]] AbsorptionRadius absorption_radius_additive(const FhnParams& params,
                                                          const StationaryOuPath& eta);

/// Pathwise domination check for additive noise: Y = X - eta obeys
/// |Y_t|^2 <= R_t where dR/dt = 2a + (1/b)|F(eta)+eta|^2 - b R, R_0 = |Y_0|^2.
struct ComparisonResult {
  std::size_t n_paths = 0;
  std::size_t violations = 0;  // grid points with |Y|^2 > R (1 + band)
  std::size_t ball_exits = 0;  // grid points with |Y|^2 > R*
  double max_ratio = 0.0;      // max over paths/times of |Y|^2 / R
  double r_star = 0.0;
  double start_radius = 0.0;
};

struct ComparisonOptions {
  double t_end = 50.0;
  double h = 0.01;
  /// Start radius for |Y_0|; capped at sqrt(R*). Kept well below sqrt(R*)
  /// by default because the explicit scheme cannot integrate the cubic
  /// contraction from |v| ~ 100 at h = 0.01, while the domination statement
  /// is radius-uniform anyway.
  double start_radius = 5.0;
  double band = 0.01;  // relative tolerance band on the domination
};

[[nodiscard]] ComparisonResult comparison_principle_check(const FhnParams& params,
                                                          std::uint64_t seed,
                                                          std::size_t n_paths,
                                                          const ComparisonOptions& options = {});

/// Random ODE obtained by conjugating the multiplicative-noise system with
/// T(z) = diag(1, e^{-sigma0 z}): for Y = (v, wbar),
///   dv/dt    = v - v^3/3 - e^{sigma0 z} wbar + I
///   dwbar/dt = eps e^{-sigma0 z} v + (sigma0 z - eps beta) wbar
///              + eps alpha e^{-sigma0 z}.
struct RandomOde {
  double t0 = 0.0;
  double dt = 0.01;
  std::function<Vec2(double, const Vec2&)> rhs;  // (t, Y) -> dY/dt, z interpolated
};

[[nodiscard]] RandomOde conjugate_multiplicative(const FhnParams& params,
                                                 const StationaryOuPath& z);

/// Round trip of the conjugacy: drive z and the full Stratonovich system
/// with one Brownian path, integrate the random ODE, map back through
/// T(z)^{-1}, and report the sup-norm gap to the direct simulation.
struct RoundTripResult {
  double sup_diff = 0.0;
  double t_end = 0.0;
  double h = 0.0;
};

[[nodiscard]] RoundTripResult conjugacy_roundtrip(const FhnParams& params, const Vec2& x0,
                                                  std::uint64_t seed, double t_end, double h);

/// State-free and quadratic coefficients of the multiplicative energy
/// estimate d|Y|^2/dt <= p(z) + q(z) |Y|^2.
[[nodiscard]] double multiplicative_p(const FhnParams& params, double z) noexcept;
[[nodiscard]] double multiplicative_q(const FhnParams& params, double z) noexcept;

/// Truncated quadrature of R_bar = integral_{-inf}^0 p(z_s) e^{int_s^0 q} ds
/// on a stationary z window ending at 0 (finiteness witness).
struct QuadratureResult {
  double value = 0.0;
  bool finite = false;
};

[[nodiscard]] QuadratureResult multiplicative_absorption(const FhnParams& params,
                                                         const StationaryOuPath& z);

/// Empirical time average of q(z_t); the negativity of this Birkhoff average
/// is what closes the multiplicative absorption argument.
struct BirkhoffResult {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n_batches = 0;
};

[[nodiscard]] BirkhoffResult birkhoff_q_average(const FhnParams& params,
                                                const StationaryOuPath& z);

/// Pullback experiment: for each horizon t, integrate every start state over
/// the theta_{-t}-shifted suffix of one master path and measure the largest
/// pairwise endpoint separation at time 0.
struct PullbackResult {
  std::vector<double> times;
  std::vector<double> separations;  // max pairwise endpoint distance per horizon
  double radius_estimate = 0.0;     // max endpoint distance from the rest state
};

[[nodiscard]] PullbackResult pullback_experiment(const FhnParams& params,
                                                 std::span<const Vec2> x_set,
                                                 std::span<const double> horizons,
                                                 std::uint64_t seed, double h = 0.01);

/// Empirical temperedness estimate (1/t) log |T(z_t)| at the window end,
/// with |.| the spectral norm max(1, e^{-sigma0 z_t}).
struct TemperednessResult {
  double estimate = 0.0;
  double t_elapsed = 0.0;
};

[[nodiscard]] TemperednessResult temperedness_check(const StationaryOuPath& z, double sigma0);

}  // namespace fhn
