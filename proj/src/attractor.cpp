#include "fhn/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fhn/errors.hpp"
#include "fhn/rng.hpp"
#include "fhn/stats.hpp"

namespace fhn {

namespace {

/// Number of grid steps in `t`, requiring t to sit on the grid.
std::size_t grid_steps(double t, double dt, const char* what) {
  if (t < 0.0 || dt <= 0.0) throw std::invalid_argument(std::string(what) + " must be >= 0");
  const double pos = t / dt;
  const double rounded = std::round(pos);
  if (std::abs(pos - rounded) > 1e-9 * std::max(1.0, pos)) {
    throw std::invalid_argument(std::string(what) + " is not grid-aligned");
  }
  return static_cast<std::size_t>(rounded);
}

/// Heun integration of n steps of `system` starting at x, using increments
/// [offset, offset + n) of the path. Time is re-based to the offset.
State advance(const SdeSystem& system, State x, const BrownianPath& path, std::size_t offset,
              std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * path.dt;
    x = detail::sde_step(system, x, t, path.dt, path.increments[offset + k]);
    if (detail::state_out_of_bounds(x)) throw BlowUpError(k, t + path.dt);
  }
  return x;
}

double interp_samples(const StationaryOuPath& z, double t) {
  const double pos = (t - z.t0) / z.dt;
  if (pos <= 0.0) return z.z.front();
  const auto k = static_cast<std::size_t>(pos);
  if (k + 1 >= z.z.size()) return z.z.back();
  const double frac = pos - static_cast<double>(k);
  return z.z[k] + frac * (z.z[k + 1] - z.z[k]);
}

void require_window_ending_at_zero(const StationaryOuPath& z) {
  if (z.z.size() < 2) throw std::invalid_argument("stationary window too short");
  if (std::abs(z.t_end()) > 1e-9) {
    throw std::invalid_argument("stationary window must end at time 0");
  }
}

}  // namespace

StationaryOuPath stationary_ou(std::uint64_t seed, std::uint64_t stream_id, double dt, double t0,
                               double t1, double sigma, double burn_in, double decay) {
  if (dt <= 0.0 || t1 < t0 || burn_in < 0.0 || decay <= 0.0 || sigma < 0.0) {
    throw std::invalid_argument("bad stationary OU window");
  }
  const std::size_t n_burn = grid_steps(burn_in, dt, "burn-in");
  const std::size_t n_keep = grid_steps(t1 - t0, dt, "window length");
  const BrownianPath path = brownian_path(seed, stream_id, dt, n_burn + n_keep, t0 - burn_in);

  StationaryOuPath out;
  out.t0 = t0;
  out.dt = dt;
  out.burn_in = burn_in;
  out.sigma = sigma;
  out.decay = decay;
  out.z.reserve(n_keep + 1);

  double z = 0.0;
  for (std::size_t k = 0; k < path.increments.size(); ++k) {
    if (k >= n_burn) out.z.push_back(z);
    const double dW = sigma * path.increments[k];
    const double zp = z - decay * z * dt + dW;
    z += 0.5 * (-decay * z - decay * zp) * dt + dW;
  }
  out.z.push_back(z);
  return out;
}

BrownianPath wiener_shift(const BrownianPath& path, double s) {
  const std::size_t offset = grid_steps(s, path.dt, "shift");
  if (offset > path.increments.size()) {
    throw std::invalid_argument("shift exceeds the path length");
  }
  BrownianPath out;
  out.t0 = path.t0;  // re-based: new time t corresponds to s + t of the original
  out.dt = path.dt;
  out.seed = path.seed;
  out.stream_id = path.stream_id;
  out.increments.assign(path.increments.begin() + static_cast<std::ptrdiff_t>(offset),
                        path.increments.end());
  return out;
}

double cocycle_check(const FhnParams& params, const Vec2& x0, const BrownianPath& path, double t,
                     double s) {
  const std::size_t n_t = grid_steps(t, path.dt, "t");
  const std::size_t n_s = grid_steps(s, path.dt, "s");
  if (n_t + n_s > path.increments.size()) {
    throw std::invalid_argument("t + s exceeds the path length");
  }
  const SdeSystem system = fhn_system(params);
  const State one_leg = advance(system, x0, path, 0, n_s + n_t);
  const State mid = advance(system, x0, path, 0, n_s);
  const State two_leg = advance(system, mid, path, n_s, n_t);
  return norm(one_leg - two_leg);
}

AbsorptionRadius absorption_radius_additive(const FhnParams& params,
                                            const StationaryOuPath& eta) {
  if (params.noise.kind != NoiseKind::additive) {
    throw std::invalid_argument("absorption radius formula applies to additive noise");
  }
  require_window_ending_at_zero(eta);
  const auto [a, b] = dissipativity_constants(params);

  const auto integrand = [&](double z) {
    const Vec2 e{0.0, z};
    const Vec2 fe = fhn_drift(params, e) + e;
    return 2.0 * a + norm_sq(fe) / b;
  };

  double r_star = 0.0;
  double cap = 0.0;
  double prev = integrand(eta.z.front()) * std::exp(b * eta.time_at(0));
  cap = std::max(cap, integrand(eta.z.front()));
  for (std::size_t k = 1; k < eta.z.size(); ++k) {
    const double g = integrand(eta.z[k]);
    cap = std::max(cap, g);
    const double cur = g * std::exp(b * eta.time_at(k));
    r_star += 0.5 * (prev + cur) * eta.dt;
    prev = cur;
  }

  AbsorptionRadius out;
  out.window = -eta.time_at(0);
  out.r_star = r_star;
  out.tail_bound = cap * std::exp(-b * out.window) / b;
  return out;
}

ComparisonResult comparison_principle_check(const FhnParams& params, std::uint64_t seed,
                                            std::size_t n_paths,
                                            const ComparisonOptions& options) {
  if (params.noise.kind != NoiseKind::additive) {
    throw std::invalid_argument("comparison principle check applies to additive noise");
  }
  if (n_paths == 0 || options.t_end <= 0.0 || options.h <= 0.0) {
    throw std::invalid_argument("bad comparison configuration");
  }
  const auto [a, b] = dissipativity_constants(params);
  const double sigma0 = params.noise.sigma0;
  const double h = options.h;
  const std::size_t n_steps = grid_steps(options.t_end, h, "t_end");

  // One absorption radius witness for the ball-exit count.
  const StationaryOuPath eta_star = stationary_ou(
      seed, stream_for(StreamPurpose::stationary, 1, 0), h, -500.0, 0.0, sigma0);
  const double r_star = absorption_radius_additive(params, eta_star).r_star;
  const double r0 = std::min(options.start_radius, std::sqrt(r_star));

  const auto rhs_r = [&](double r, double z) {
    const Vec2 e{0.0, z};
    const Vec2 fe = fhn_drift(params, e) + e;
    return 2.0 * a + norm_sq(fe) / b - b * r;
  };
  const auto rhs_y = [&](const Vec2& y, double z) {
    const Vec2 e{0.0, z};
    return fhn_drift(params, y + e) + e;
  };

  ComparisonResult result;
  result.n_paths = n_paths;
  result.r_star = r_star;
  result.start_radius = r0;

  constexpr double kTwoPi = 6.283185307179586476925286766559;
  for (std::size_t j = 0; j < n_paths; ++j) {
    const StationaryOuPath eta = stationary_ou(
        seed, stream_for(StreamPurpose::stationary, 0, j), h, 0.0, options.t_end, sigma0);
    const double phi = kTwoPi * static_cast<double>(j) / static_cast<double>(n_paths);
    Vec2 y{r0 * std::cos(phi), r0 * std::sin(phi)};
    double r = norm_sq(y);
    for (std::size_t k = 0; k < n_steps; ++k) {
      const double z0 = eta.z[k];
      const double z1 = eta.z[k + 1];
      const Vec2 fy0 = rhs_y(y, z0);
      const Vec2 yp = y + h * fy0;
      y = y + 0.5 * h * (fy0 + rhs_y(yp, z1));
      const double fr0 = rhs_r(r, z0);
      const double rp = r + h * fr0;
      r += 0.5 * h * (fr0 + rhs_r(rp, z1));

      const double y2 = norm_sq(y);
      result.max_ratio = std::max(result.max_ratio, y2 / r);
      if (y2 > r * (1.0 + options.band)) ++result.violations;
      if (y2 > r_star) ++result.ball_exits;
    }
  }
  return result;
}

RandomOde conjugate_multiplicative(const FhnParams& params, const StationaryOuPath& z) {
  if (params.noise.kind != NoiseKind::multiplicative) {
    throw std::invalid_argument("conjugation applies to multiplicative noise");
  }
  RandomOde ode;
  ode.t0 = z.t0;
  ode.dt = z.dt;
  ode.rhs = [params, z](double t, const Vec2& y) -> Vec2 {
    const double zt = interp_samples(z, t);
    const double s0 = params.noise.sigma0;
    const double ep = std::exp(s0 * zt);
    const double em = std::exp(-s0 * zt);
    const double v = y[0];
    const double wbar = y[1];
    return {v - v * v * v / 3.0 - ep * wbar + params.bias_current,
            params.epsilon * em * v + (s0 * zt - params.epsilon * params.beta) * wbar +
                params.epsilon * params.alpha * em};
  };
  return ode;
}

RoundTripResult conjugacy_roundtrip(const FhnParams& params, const Vec2& x0, std::uint64_t seed,
                                    double t_end, double h) {
  if (params.noise.kind != NoiseKind::multiplicative) {
    throw std::invalid_argument("conjugation applies to multiplicative noise");
  }
  const std::size_t n = grid_steps(t_end, h, "t_end");
  const BrownianPath path =
      brownian_path(seed, stream_for(StreamPurpose::engine_test, 1, 0), h, n);
  const double s0 = params.noise.sigma0;

  // Unit-diffusion OU driver z from the same increments, z_0 = 0 (the
  // conjugacy is pathwise exact for any initial z).
  std::vector<double> z(n + 1);
  z[0] = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dW = path.increments[k];
    const double zp = z[k] - z[k] * h + dW;
    z[k + 1] = z[k] + 0.5 * (-z[k] - zp) * h + dW;
  }

  StationaryOuPath z_path;
  z_path.t0 = 0.0;
  z_path.dt = h;
  z_path.sigma = 1.0;
  z_path.z = z;
  const RandomOde ode = conjugate_multiplicative(params, z_path);

  const Trajectory direct = integrate(fhn_system(params), x0, path);

  Vec2 y{x0[0], std::exp(-s0 * z[0]) * x0[1]};
  double sup = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const Vec2 mapped{y[0], std::exp(s0 * z[k]) * y[1]};
    sup = std::max(sup, norm(mapped - direct.states[k]));
    if (k == n) break;
    const double t = static_cast<double>(k) * h;
    const Vec2 f0 = ode.rhs(t, y);
    const Vec2 yp = y + h * f0;
    y = y + 0.5 * h * (f0 + ode.rhs(t + h, yp));
  }

  return {sup, t_end, h};
}

double multiplicative_q(const FhnParams& params, double z) noexcept {
  return params.noise.sigma0 * z - params.epsilon * params.beta / 4.0;
}

double multiplicative_p(const FhnParams& params, double z) noexcept {
  const double s0 = params.noise.sigma0;
  const double eb = params.epsilon * params.beta;
  const double ep = std::exp(s0 * z);
  const double em = std::exp(-s0 * z);
  const double gap = params.epsilon * em - ep;
  const double bracket = 1.0 + gap * gap / (2.0 * eb) - s0 * z + eb / 2.0;
  const double ii = params.bias_current * params.bias_current;
  const double aa = params.epsilon * params.alpha;
  return 3.0 * bracket * bracket + (4.0 / eb) * (ii + aa * aa * em * em);
}

QuadratureResult multiplicative_absorption(const FhnParams& params, const StationaryOuPath& z) {
  require_window_ending_at_zero(z);
  const std::size_t n = z.z.size();

  // Suffix integrals Q_k = int_{s_k}^0 q(z) dr by reverse trapezoid.
  std::vector<double> q(n);
  for (std::size_t k = 0; k < n; ++k) q[k] = multiplicative_q(params, z.z[k]);
  std::vector<double> suffix(n, 0.0);
  for (std::size_t k = n - 1; k-- > 0;) {
    suffix[k] = suffix[k + 1] + 0.5 * (q[k] + q[k + 1]) * z.dt;
  }

  double value = 0.0;
  double prev = multiplicative_p(params, z.z.front()) * std::exp(suffix.front());
  for (std::size_t k = 1; k < n; ++k) {
    const double cur = multiplicative_p(params, z.z[k]) * std::exp(suffix[k]);
    value += 0.5 * (prev + cur) * z.dt;
    prev = cur;
  }
  return {value, std::isfinite(value)};
}

BirkhoffResult birkhoff_q_average(const FhnParams& params, const StationaryOuPath& z) {
  if (z.z.size() < 40) throw std::invalid_argument("window too short for a Birkhoff average");
  std::vector<double> samples(z.z.size());
  for (std::size_t k = 0; k < z.z.size(); ++k) samples[k] = multiplicative_q(params, z.z[k]);
  BirkhoffResult out;
  out.n_batches = 20;
  out.mean = mean(samples);
  out.se = batch_means_se(samples, out.n_batches);
  return out;
}

PullbackResult pullback_experiment(const FhnParams& params, std::span<const Vec2> x_set,
                                   std::span<const double> horizons, std::uint64_t seed,
                                   double h) {
  if (x_set.size() < 2) throw std::invalid_argument("need at least two start states");
  if (horizons.empty()) throw std::invalid_argument("need at least one horizon");
  for (std::size_t i = 1; i < horizons.size(); ++i) {
    if (horizons[i] <= horizons[i - 1]) {
      throw std::invalid_argument("horizons must be increasing");
    }
  }
  const double t_max = horizons.back();
  const std::size_t n_max = grid_steps(t_max, h, "horizon");
  const BrownianPath master =
      brownian_path(seed, stream_for(StreamPurpose::pullback, 0, 0), h, n_max, -t_max);
  const SdeSystem system = fhn_system(params);
  const Vec2 rest = fixed_point(params).state();

  PullbackResult result;
  result.times.reserve(horizons.size());
  result.separations.reserve(horizons.size());
  std::vector<Vec2> endpoints(x_set.size());

  for (const double t : horizons) {
    const std::size_t n_t = grid_steps(t, h, "horizon");
    const std::size_t offset = n_max - n_t;  // theta_{-t}: suffix of the master path
    for (std::size_t i = 0; i < x_set.size(); ++i) {
      endpoints[i] = advance(system, x_set[i], master, offset, n_t);
      result.radius_estimate = std::max(result.radius_estimate, norm(endpoints[i] - rest));
    }
    double sep = 0.0;
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
      for (std::size_t j = i + 1; j < endpoints.size(); ++j) {
        sep = std::max(sep, norm(endpoints[i] - endpoints[j]));
      }
    }
    result.times.push_back(t);
    result.separations.push_back(sep);
  }
  return result;
}

TemperednessResult temperedness_check(const StationaryOuPath& z, double sigma0) {
  if (z.z.size() < 2) throw std::invalid_argument("stationary window too short");
  const double elapsed = z.dt * static_cast<double>(z.z.size() - 1);
  const double log_norm = std::max(0.0, -sigma0 * z.z.back());
  return {log_norm / elapsed, elapsed};
}

}  // namespace fhn
