#include "fhn/model.hpp"

#include <cmath>
#include <limits>

#include "fhn/errors.hpp"

namespace fhn {

void validate_params(const FhnParams& params) {
  if (!(params.epsilon > 0.0 && params.epsilon < 1.0)) {
    throw std::invalid_argument("FhnParams: epsilon must lie in (0, 1)");
  }
  if (!(params.beta > 0.0)) throw std::invalid_argument("FhnParams: beta must be positive");
  if (!(params.noise.sigma0 >= 0.0)) {
    throw std::invalid_argument("FhnParams: sigma0 must be non-negative");
  }
}

State fhn_drift(const FhnParams& params, const State& x) noexcept {
  const double v = x[0];
  const double w = x[1];
  return {v - v * v * v / 3.0 - w + params.bias_current,
          params.epsilon * (v + params.alpha - params.beta * w)};
}

double critical_manifold(const FhnParams& params, double v) noexcept {
  return v - v * v * v / 3.0 + params.bias_current;
}

bool critical_manifold_stable(double v) noexcept { return v * v > 1.0; }

State noise_field(const NoiseSpec& noise, const State& x) noexcept {
  switch (noise.kind) {
    case NoiseKind::additive:
      return {0.0, noise.sigma0};
    case NoiseKind::multiplicative:
      return {0.0, noise.sigma0 * x[1]};
  }
  return {0.0, 0.0};
}

FixedPoint fixed_point(const FhnParams& params) {
  validate_params(params);

  FixedPoint fp;
  // Substituting the w-nullcline w = (v + alpha)/beta into the v-nullcline
  // gives the depressed cubic v^3 + p v + q = 0.
  fp.p = 3.0 * (1.0 / params.beta - 1.0);
  fp.q = 3.0 * (params.alpha / params.beta - params.bias_current);
  fp.delta = std::pow(1.0 / params.beta - 1.0, 3) +
             2.25 * std::pow(params.alpha / params.beta - params.bias_current, 2);

  // delta > 0: one simple real root. delta == 0 with p = q = 0 is the triple
  // root at the origin, still a unique equilibrium; every other delta <= 0
  // configuration has multiple intersections.
  if (fp.delta < 0.0 || (fp.delta == 0.0 && !(fp.p == 0.0 && fp.q == 0.0))) {
    throw NotUniqueFixedPointError(fp.delta);
  }

  const double sqrt_delta = std::sqrt(fp.delta);
  double v = std::cbrt(-fp.q / 2.0 - sqrt_delta) + std::cbrt(-fp.q / 2.0 + sqrt_delta);

  // Newton polish on the cubic; the closed form is already accurate, so this
  // converges in a couple of iterations and pins the residual invariant.
  for (int iter = 0; iter < 60; ++iter) {
    const double f = v * v * v + fp.p * v + fp.q;
    const double df = 3.0 * v * v + fp.p;
    if (std::abs(f) < 1e-14 || std::abs(df) < 1e-300) break;
    v -= f / df;
  }

  fp.v_e = v;
  fp.w_e = (v + params.alpha) / params.beta;
  fp.jacobian = drift_jacobian(params, fp.state());
  fp.residual = norm(fhn_drift(params, fp.state()));

  const Mat2& m = fp.jacobian;
  const double disc = 4.0 * params.epsilon - std::pow(m.a11 - m.a22, 2);
  fp.mu = -0.5 * m.trace();
  if (disc > 0.0) {
    fp.nu = 0.5 * std::sqrt(disc);
    fp.complex_pair = true;
  } else {
    fp.nu = 0.0;
    fp.complex_pair = false;
  }
  return fp;
}

Mat2 drift_jacobian(const FhnParams& params, const State& x) noexcept {
  return {1.0 - x[0] * x[0], -1.0, params.epsilon, -params.epsilon * params.beta};
}

ExcitableReport validate_excitable(const FhnParams& params, double ratio_threshold) {
  ExcitableReport report;
  report.ratio_threshold = ratio_threshold;
  FixedPoint fp;
  try {
    fp = fixed_point(params);
  } catch (const NotUniqueFixedPointError& err) {
    report.delta = err.delta;
    return report;  // all flags stay false
  }
  report.unique_fixed_point = fp.delta > 0.0;
  report.delta = fp.delta;
  report.complex_pair = fp.complex_pair;
  report.mu = fp.mu;
  report.nu = fp.nu;
  report.stable_focus = fp.complex_pair && fp.mu > 0.0;
  report.ratio = fp.nu > 0.0 ? fp.mu / fp.nu : std::numeric_limits<double>::infinity();
  report.averaging_valid = report.stable_focus && report.ratio < ratio_threshold;
  report.pass = report.unique_fixed_point && report.stable_focus && report.averaging_valid;
  return report;
}

DissipativityConstants dissipativity_constants(const FhnParams& params) {
  const double eps_beta = params.epsilon * params.beta;
  if (!(eps_beta > 0.0)) {
    throw std::invalid_argument("dissipativity_constants: epsilon*beta must be positive");
  }
  const double one_minus_eps = 1.0 - params.epsilon;
  const double inner = 1.0 + eps_beta / 2.0 + one_minus_eps * one_minus_eps / (2.0 * eps_beta);
  return {3.0 * inner * inner, eps_beta / 2.0};
}

SdeSystem fhn_system(const FhnParams& params) {
  validate_params(params);
  SdeSystem system;
  system.dim = 2;
  system.interpretation = NoiseInterpretation::stratonovich;
  system.drift = [params](const State& x, double) { return fhn_drift(params, x); };
  system.diffusion = [noise = params.noise](const State& x, double) {
    return noise_field(noise, x);
  };
  return system;
}

}  // namespace fhn
