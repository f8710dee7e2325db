#pragma once

#include "fhn/mat2.hpp"
#include "fhn/sde.hpp"

namespace fhn {

enum class NoiseKind { additive, multiplicative };

/// Scalar noise on the recovery variable: amplitude sigma0, either constant
/// (additive) or proportional to w (multiplicative).
struct NoiseSpec {
  NoiseKind kind = NoiseKind::additive;
  double sigma0 = 0.01;
};

/// Two-variable neuron model
///   dv = (v - v^3/3 - w + I) dt
///   dw = eps (v + alpha - beta w) dt + h(w) o dB
/// in the excitable parameter regime (slow recovery, single stable rest
/// state). Defaults are the regime studied throughout this project.
struct FhnParams {
  double bias_current = 0.265;  // I
  double alpha = 0.7;
  double beta = 0.75;
  double epsilon = 0.08;
  NoiseSpec noise{};
};

/// Throws std::invalid_argument unless epsilon in (0,1), beta > 0, sigma0 >= 0.
void validate_params(const FhnParams& params);

/// Deterministic vector field (f, g) of the model.
[[nodiscard]] State fhn_drift(const FhnParams& params, const State& x) noexcept;

/// v-nullcline w = v - v^3/3 + I (equilibria of the fast subsystem).
[[nodiscard]] double critical_manifold(const FhnParams& params, double v) noexcept;

/// Fast-subsystem stability of the nullcline branch at v: stable where the
/// fast drift's v-derivative 1 - v^2 is negative, i.e. |v| > 1.
[[nodiscard]] bool critical_manifold_stable(double v) noexcept;

/// Noise field: (0, sigma0) or (0, sigma0 * w).
[[nodiscard]] State noise_field(const NoiseSpec& noise, const State& x) noexcept;

/// The unique rest state with its cubic auxiliaries and eigenstructure.
struct FixedPoint {
  double v_e = 0.0;
  double w_e = 0.0;
  double p = 0.0;      // depressed-cubic linear coefficient
  double q = 0.0;      // depressed-cubic constant coefficient
  double delta = 0.0;  // cubic discriminant; > 0 <=> unique simple root
  Mat2 jacobian{};
  /// Eigenvalues are -mu +/- i*nu when complex_pair; otherwise mu = -trace/2
  /// and nu = 0.
  double mu = 0.0;
  double nu = 0.0;
  bool complex_pair = false;
  double residual = 0.0;  // ||F(X_e)|| after Newton refinement

  [[nodiscard]] Vec2 state() const noexcept { return {v_e, w_e}; }
};

/// Solves the nullcline-intersection cubic in closed form (Cardano), then
/// polishes with Newton to drive the residual below 1e-10. Throws
/// NotUniqueFixedPointError when the cubic has multiple real roots.
[[nodiscard]] FixedPoint fixed_point(const FhnParams& params);

/// Jacobian of the drift at an arbitrary state.
[[nodiscard]] Mat2 drift_jacobian(const FhnParams& params, const State& x) noexcept;

/// Diagnostic report for the excitable regime: unique rest state, stable
/// focus, and time-scale ratio mu/nu small enough for rotational averaging.
struct ExcitableReport {
  bool unique_fixed_point = false;
  double delta = 0.0;
  bool complex_pair = false;
  double mu = 0.0;
  double nu = 0.0;
  bool stable_focus = false;
  double ratio = 0.0;  // mu/nu
  double ratio_threshold = 0.0;
  bool averaging_valid = false;
  bool pass = false;
};

[[nodiscard]] ExcitableReport validate_excitable(const FhnParams& params,
                                                 double ratio_threshold = 0.2);

/// One-sided dissipativity constants (a, b) with
/// <X1-X2, F(X1)-F(X2)> <= a - b ||X1-X2||^2.
struct DissipativityConstants {
  double a = 0.0;
  double b = 0.0;
};

[[nodiscard]] DissipativityConstants dissipativity_constants(const FhnParams& params);

/// The stochastic model as a Stratonovich SdeSystem. With sigma0 = 0 this
/// integrates exactly like the deterministic model (zero increments add
/// nothing in the Heun scheme).
[[nodiscard]] SdeSystem fhn_system(const FhnParams& params);

}  // namespace fhn
