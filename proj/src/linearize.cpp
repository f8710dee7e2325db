#include "fhn/linearize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fhn/errors.hpp"

namespace fhn {

NormalForm normal_form(const FhnParams& params, const FixedPoint& fp) {
  if (!fp.complex_pair) {
    throw UnsupportedRegimeError(
        "normal_form: rest-state eigenvalues are real; rotation coordinates do not exist");
  }
  const Mat2& m = fp.jacobian;
  NormalForm nf;
  nf.mu = fp.mu;
  nf.nu = fp.nu;
  nf.sigma0 = params.noise.sigma0;
  nf.noise_kind = params.noise.kind;
  nf.Q = {-fp.nu, m.a11 + fp.mu, 0.0, m.a21};
  nf.Q_inv = nf.Q.inverse();
  nf.A = {-fp.mu, fp.nu, -fp.nu, -fp.mu};
  nf.h_e = nf.Q_inv * Vec2{0.0, params.noise.sigma0};
  nf.B1 = nf.Q_inv * Mat2::diag(0.0, params.noise.sigma0) * nf.Q;
  return nf;
}

NormalForm normal_form(const FhnParams& params) { return normal_form(params, fixed_point(params)); }

double gamma_bound(const FixedPoint& fp, double r) {
  if (r < 0.0) throw std::invalid_argument("gamma_bound: radius must be non-negative");
  return r * r / 3.0 + std::abs(fp.v_e) * r;
}

SdeSystem shifted_system(const FhnParams& params, const FixedPoint& fp) {
  SdeSystem system;
  system.dim = 2;
  system.interpretation = NoiseInterpretation::stratonovich;
  const Vec2 rest = fp.state();
  const Vec2 drift_at_rest = fhn_drift(params, rest);
  system.drift = [params, rest, drift_at_rest](const State& x, double) {
    return fhn_drift(params, x + rest) - drift_at_rest;
  };
  system.diffusion = [noise = params.noise, rest](const State& x, double) {
    return noise_field(noise, x + rest);
  };
  return system;
}

SdeSystem linearized_system(const FhnParams& params, const FixedPoint& fp) {
  SdeSystem system;
  system.dim = 2;
  system.interpretation = NoiseInterpretation::stratonovich;
  const Vec2 rest = fp.state();
  system.drift = [m = fp.jacobian](const State& x, double) { return m * x; };
  system.diffusion = [noise = params.noise, rest](const State& x, double) {
    return noise_field(noise, x + rest);
  };
  return system;
}

SdeSystem additive_linear_system(const FhnParams& params, const FixedPoint& fp) {
  SdeSystem system;
  system.dim = 2;
  system.interpretation = NoiseInterpretation::stratonovich;
  const Vec2 frozen = noise_field(params.noise, fp.state());
  system.drift = [m = fp.jacobian](const State& x, double) { return m * x; };
  system.diffusion = [frozen](const State&, double) { return frozen; };
  return system;
}

LambdaCondition lambda_condition(const FhnParams& params) {
  const NormalForm nf = normal_form(params);
  LambdaCondition cond;
  cond.b1_gram_norm = spectral_norm(nf.B1.transpose() * nf.B1);
  cond.lambda = nf.mu - 2.0 * cond.b1_gram_norm;
  cond.positive = cond.lambda > 0.0;
  return cond;
}

ApproxExperimentResult approximation_experiment(const FhnParams& params, double r,
                                                std::size_t n_trials, std::uint64_t seed,
                                                const ApproxOptions& options) {
  if (n_trials == 0) throw std::invalid_argument("approximation_experiment: n_trials must be > 0");
  if (!(r > 0.0 && r <= 0.5)) {
    throw std::invalid_argument("approximation_experiment: radius must lie in (0, 0.5]");
  }

  const FixedPoint fp = fixed_point(params);
  const SdeSystem shifted = shifted_system(params, fp);
  const SdeSystem linear = linearized_system(params, fp);
  const SdeSystem frozen = additive_linear_system(params, fp);
  const LambdaCondition lambda = lambda_condition(params);

  const std::size_t n_steps = static_cast<std::size_t>(std::llround(options.horizon / options.h));
  const std::size_t sample_stride = std::max<std::size_t>(1, n_steps / options.sample_points);
  const std::size_t n_samples = n_steps / sample_stride;

  ApproxExperimentResult result;
  result.r = r;
  result.n_trials = n_trials;
  result.gamma_r = gamma_bound(fp, r);
  result.lambda = lambda.lambda;
  result.lambda_positive = lambda.positive;

  std::vector<double> lin_sq_sum(n_samples, 0.0);     // E||X̂ - X̄||² accumulators
  std::vector<double> frozen_sq_sum(n_samples, 0.0);  // E||X̂ - X̃||² accumulators
  double max_sup = 0.0;
  double sum_sup = 0.0;

  for (std::size_t trial = 0; trial < n_trials; ++trial) {
    const BrownianPath path = brownian_path(
        seed, stream_for(StreamPurpose::linearization, 0, trial), options.h, n_steps);

    // The three displacement processes share one Brownian path and all start
    // at the rest state (zero displacement).
    State x_shift{0.0, 0.0};
    State x_lin{0.0, 0.0};
    State x_frozen{0.0, 0.0};

    bool exited = false;
    double sup_err = 0.0;
    double lin_sq_frozen_at_exit = 0.0;
    double frozen_sq_frozen_at_exit = 0.0;
    std::size_t sample_index = 0;

    for (std::size_t i = 0; i < n_steps; ++i) {
      if (!exited) {
        const double t = path.time_at(i);
        const double dw = path.increments[i];
        x_shift = detail::sde_step(shifted, x_shift, t, options.h, dw);
        x_lin = detail::sde_step(linear, x_lin, t, options.h, dw);
        x_frozen = detail::sde_step(frozen, x_frozen, t, options.h, dw);
        if (norm(x_shift) >= r) {
          // Exit: statistics freeze at the last in-ball grid state, so this
          // step's states are not folded in.
          exited = true;
        } else {
          sup_err = std::max(sup_err, norm(x_shift - x_lin));
          lin_sq_frozen_at_exit = norm_sq(x_shift - x_lin);
          frozen_sq_frozen_at_exit = norm_sq(x_shift - x_frozen);
        }
      }
      if ((i + 1) % sample_stride == 0 && sample_index < n_samples) {
        lin_sq_sum[sample_index] += lin_sq_frozen_at_exit;
        frozen_sq_sum[sample_index] += frozen_sq_frozen_at_exit;
        ++sample_index;
      }
    }

    if (!exited) ++result.capped_trials;
    max_sup = std::max(max_sup, sup_err);
    sum_sup += sup_err;
  }

  double max_lin_ms = 0.0;
  double max_frozen_ms = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    max_lin_ms = std::max(max_lin_ms, lin_sq_sum[s] / static_cast<double>(n_trials));
    max_frozen_ms = std::max(max_frozen_ms, frozen_sq_sum[s] / static_cast<double>(n_trials));
  }

  result.mean_sup = sum_sup / static_cast<double>(n_trials);
  result.additive_linear_stat = max_frozen_ms;
  result.al_ratio = max_frozen_ms / (r * r);

  const double scale_add = result.gamma_r * r;
  if (params.noise.kind == NoiseKind::additive) {
    result.error_stat = max_sup;
    result.ratio = max_sup / scale_add;
    result.mean_ratio = result.mean_sup / scale_add;
  } else {
    result.error_stat = max_lin_ms;
    result.ratio = max_lin_ms / (scale_add * scale_add);
    result.mean_ratio = result.ratio;
  }
  return result;
}

}  // namespace fhn
