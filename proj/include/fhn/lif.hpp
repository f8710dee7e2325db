#pragma once

#include <vector>

#include "fhn/brownian.hpp"
#include "fhn/linearize.hpp"
#include "fhn/model.hpp"
#include "fhn/sde.hpp"

namespace fhn {

/// Rotation coordinates y = Q^-1 x and back.
[[nodiscard]] Vec2 transform_state(const NormalForm& nf, const Vec2& x) noexcept;
[[nodiscard]] Vec2 transform_state_inverse(const NormalForm& nf, const Vec2& y) noexcept;

/// Effective isotropic diffusion amplitude of the rotation-averaged noise,
/// sigma = sqrt(tr(C C^T)/2) with C = Q^-1 diag(0, sigma0).
[[nodiscard]] double sigma_eff(const FhnParams& params);

enum class LifKind { radial_ou, polar_radial };

/// One-dimensional radial reduction of the subthreshold dynamics. Two
/// variants:
///   radial_ou:    dR = [sigma^2/(2R) - mu R] dt + sigma dB        (averaged)
///   polar_radial: dR = [(|h|^2 - <h,theta_t>^2)/(2R) - mu R] dt
///                      + <theta_t, h> dB,  theta_t = (sin nu t, cos nu t)
/// Both are Ito equations with a repelling 1/(2R) drift singularity at 0.
struct LifModel {
  LifKind kind = LifKind::radial_ou;
  double mu = 0.0;
  double nu = 0.0;
  double sigma_eff = 0.0;  // isotropic amplitude; RMS diffusion for polar_radial
  Vec2 h_e{};              // transformed noise direction (polar_radial coefficients)
  double reset_state = 0.0;
  double theta_phase = 0.0;  // initial angle offset of theta_t
  double sigma0 = 0.0;

  /// Drift at radius r >= 0 (time enters only for polar_radial). Throws
  /// std::domain_error at r <= 0 where the equation is singular.
  [[nodiscard]] double drift(double r, double t = 0.0) const;

  /// Diffusion coefficient (time-dependent for polar_radial).
  [[nodiscard]] double diffusion(double t = 0.0) const noexcept;

  /// Radius where the radial_ou drift vanishes, sigma/sqrt(2 mu).
  [[nodiscard]] double drift_root() const noexcept;

  /// Integrable 1-D Ito system for step size h. Near the singularity the
  /// drift is evaluated at max(R, floor) with floor = sigma_eff*sqrt(h)/2 —
  /// the scale the process reaches in one step from 0 — and a reflecting
  /// guard R <- |R| keeps the state non-negative (guard hits are counted by
  /// the integrator as constraint_hits).
  [[nodiscard]] SdeSystem make_sde(double h) const;
};

[[nodiscard]] LifModel radial_ou_model(const FhnParams& params);
[[nodiscard]] LifModel polar_radial_model(const FhnParams& params);

/// Rotation-averaged approximation in closed form: a standard 2-D OU process
/// S run in slow time, rescaled and counter-rotated,
///   Y_app(t) = (sigma/sqrt(mu)) Rot(-nu t) S(mu t).
/// The two Brownian paths drive the two components of S and are understood
/// in slow time (their dt is the slow-time step), so output sample k is at
/// original time t_k = k * (dt / mu).
struct AveragedTrajectory {
  std::vector<double> t;    // original (fast) times
  std::vector<Vec2> y_app;  // approximation samples
  std::vector<Vec2> s_bar;  // slow-time OU samples
  double sigma = 0.0;
  double mu = 0.0;
  double nu = 0.0;
};

[[nodiscard]] AveragedTrajectory averaged_process(const FhnParams& params,
                                                  const BrownianPath& b1, const BrownianPath& b2,
                                                  const Vec2& y0);

}  // namespace fhn
