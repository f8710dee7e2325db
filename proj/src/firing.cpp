#include "fhn/firing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fhn/errors.hpp"
#include "fhn/rng.hpp"

namespace fhn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Heun step of the full 2-D model, arithmetic-identical to the generic
/// Stratonovich branch of detail::sde_step but without the std::function
/// indirection (this is the hot loop of every firing estimate).
inline State fhn_heun_step(const FhnParams& params, const State& x, double h, double dW) {
  const State f0 = fhn_drift(params, x);
  const State g0 = noise_field(params.noise, x);
  const State xp = {x[0] + f0[0] * h + g0[0] * dW, x[1] + f0[1] * h + g0[1] * dW};
  const State f1 = fhn_drift(params, xp);
  const State g1 = noise_field(params.noise, xp);
  return {x[0] + 0.5 * (f0[0] + f1[0]) * h + 0.5 * (g0[0] + g1[0]) * dW,
          x[1] + 0.5 * (f0[1] + f1[1]) * h + 0.5 * (g0[1] + g1[1]) * dW};
}

/// Wraps an angle difference into (-pi, pi].
inline double wrap_angle(double d) noexcept {
  while (d > std::numbers::pi) d -= kTwoPi;
  while (d <= -std::numbers::pi) d += kTwoPi;
  return d;
}

struct TrialOutcome {
  bool spiked = false;
  double time = 0.0;
};

/// One trial: integrate from x0 until the first upward crossing of v = 0
/// (spike), one full revolution around the rest state (subthreshold cycle
/// closed without a spike), or the hard cap.
TrialOutcome run_firing_trial(const FhnParams& params, const Vec2& rest, const State& x0,
                              double h, double t_cap, GaussianStream& gauss) {
  constexpr double kAngleEps = 1e-9;  // displacement below which the angle is noise
  const double sqrt_h = std::sqrt(h);
  const std::size_t max_steps = static_cast<std::size_t>(std::ceil(t_cap / h));

  State x = x0;
  bool have_angle = false;
  double angle_prev = 0.0;
  double unwound = 0.0;

  for (std::size_t k = 0; k < max_steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const State next = fhn_heun_step(params, x, h, gauss.next() * sqrt_h);
    if (detail::state_out_of_bounds(next)) {
      throw BlowUpError(k, t + h);
    }
    if (x[0] < 0.0 && next[0] >= 0.0) {
      const double theta = -x[0] / (next[0] - x[0]);
      return {true, t + theta * h};
    }
    x = next;
    const double dv = x[0] - rest[0];
    const double dw = x[1] - rest[1];
    if (dv * dv + dw * dw > kAngleEps * kAngleEps) {
      const double angle = std::atan2(dw, dv);
      if (have_angle) {
        unwound += wrap_angle(angle - angle_prev);
        if (std::abs(unwound) >= kTwoPi) {
          return {false, t + h};  // loop around the rest state closed, no spike
        }
      }
      angle_prev = angle;
      have_angle = true;
    }
  }
  return {false, t_cap};
}

std::size_t lif_kind_index(LifKind kind) noexcept {
  return kind == LifKind::radial_ou ? 0 : 1;
}

/// Linear interpolation in a uniformly sampled buffer (sample i at i*h).
inline double sample_at(const std::vector<double>& buf, double h, double t) noexcept {
  if (t <= 0.0) return buf.front();
  const double pos = t / h;
  const auto k = static_cast<std::size_t>(pos);
  if (k + 1 >= buf.size()) return buf.back();
  const double frac = pos - static_cast<double>(k);
  return buf[k] + frac * (buf[k + 1] - buf[k]);
}

/// Cumulative trapezoid integral of a density curve at its own grid points.
std::vector<double> integrate_density(std::span<const DensityPoint> density) {
  std::vector<double> cdf(density.size(), 0.0);
  for (std::size_t j = 1; j < density.size(); ++j) {
    const double dt = density[j].t - density[j - 1].t;
    cdf[j] = cdf[j - 1] + 0.5 * (density[j].g + density[j - 1].g) * dt;
  }
  return cdf;
}

double interp_cdf(std::span<const DensityPoint> density, const std::vector<double>& cdf,
                  double t) {
  if (t <= density.front().t) return 0.0;
  if (t >= density.back().t) return cdf.back();
  std::size_t lo = 0;
  std::size_t hi = density.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (density[mid].t <= t ? lo : hi) = mid;
  }
  const double span = density[hi].t - density[lo].t;
  const double frac = span > 0.0 ? (t - density[lo].t) / span : 0.0;
  return cdf[lo] + frac * (cdf[hi] - cdf[lo]);
}

void require_grid(std::span<const double> t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("time grid is empty");
  if (t_grid.front() < 0.0) throw std::invalid_argument("time grid starts before 0");
  for (std::size_t j = 1; j < t_grid.size(); ++j) {
    if (t_grid[j] <= t_grid[j - 1]) {
      throw std::invalid_argument("time grid is not strictly increasing");
    }
  }
}

}  // namespace

FiringProbeGrid FiringProbeGrid::for_params(const FhnParams& params, const FixedPoint& fp,
                                            std::size_t trials_per_point) {
  (void)params;
  constexpr double kAnchorW = -0.453;
  FiringProbeGrid grid;
  grid.delta = std::abs(fp.w_e - kAnchorW) / 20.0;
  grid.trials_per_point = trials_per_point;
  return grid;
}

std::optional<Event> detect_spike(const Trajectory& trajectory) {
  for (std::size_t k = 0; k + 1 < trajectory.states.size(); ++k) {
    const State& a = trajectory.states[k];
    const State& b = trajectory.states[k + 1];
    if (a[0] < 0.0 && b[0] >= 0.0) {
      const double theta = -a[0] / (b[0] - a[0]);
      Event ev;
      ev.kind = EventKind::spike;
      ev.time = trajectory.time_at(k) + theta * trajectory.dt;
      ev.state = {a[0] + theta * (b[0] - a[0]), a[1] + theta * (b[1] - a[1])};
      return ev;
    }
  }
  return std::nullopt;
}

std::vector<FiringProbRow> estimate_firing_prob(const FhnParams& params,
                                                const FiringProbeGrid& grid, std::uint64_t seed,
                                                const FiringOptions& options) {
  validate_params(params);
  if (options.h <= 0.0) throw std::invalid_argument("step size must be positive");
  if (grid.n_points == 0 || grid.trials_per_point == 0) {
    throw std::invalid_argument("probe grid is empty");
  }
  const FixedPoint fp = fixed_point(params);
  if (!fp.complex_pair || fp.nu <= 0.0) {
    throw UnsupportedRegimeError("firing probabilities need a rotating linearization");
  }
  const double t_cap = options.cap_periods * kTwoPi / fp.nu;
  const Vec2 rest = fp.state();

  std::vector<FiringProbRow> table(grid.n_points);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const Vec2 x0 = grid.point(fp, i);
    std::size_t spikes = 0;
    for (std::size_t k = 0; k < grid.trials_per_point; ++k) {
      GaussianStream gauss(seed, stream_for(StreamPurpose::firing, i, k));
      if (run_firing_trial(params, rest, x0, options.h, t_cap, gauss).spiked) ++spikes;
    }
    const auto n = static_cast<double>(grid.trials_per_point);
    const double p = static_cast<double>(spikes) / n;
    table[i] = {i, grid.l(i), p, std::sqrt(p * (1.0 - p) / n), spikes, grid.trials_per_point};
  }
  return table;
}

double sigmoid_prob(const SigmoidFit& fit, double l) noexcept {
  return 1.0 / (1.0 + std::exp((fit.a - l) / fit.b));
}

SigmoidFit fit_sigmoid(std::span<const double> l, std::span<const double> p_hat, double sigma0) {
  if (l.size() != p_hat.size()) throw std::invalid_argument("table column sizes differ");
  const std::size_t n = l.size();
  if (n < 3) throw std::invalid_argument("need at least 3 points to fit a sigmoid");

  const auto [pmin_it, pmax_it] = std::minmax_element(p_hat.begin(), p_hat.end());
  if (*pmax_it - *pmin_it < 1e-12) {
    throw FitFailureError("firing-probability table is constant; location is unidentifiable");
  }

  // Initial location/scale from the empirical 0.25/0.5/0.75 crossings.
  const auto crossing = [&](double level) -> double {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double d0 = p_hat[i] - level;
      const double d1 = p_hat[i + 1] - level;
      if (d0 <= 0.0 && d1 >= 0.0 && d1 > d0) {
        return l[i] + (l[i + 1] - l[i]) * (-d0) / (d1 - d0);
      }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs(p_hat[i] - level) < std::abs(p_hat[best] - level)) best = i;
    }
    return l[best];
  };
  const double span = l.back() - l.front();
  double a = crossing(0.5);
  double b = (crossing(0.75) - crossing(0.25)) / (2.0 * std::log(3.0));
  if (!(b > 0.0)) b = span / 10.0;
  b = std::max(b, 1e-4 * std::max(span, 1.0));

  const auto ssr_at = [&](double aa, double bb) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = 1.0 / (1.0 + std::exp((aa - l[i]) / bb));
      const double r = p_hat[i] - m;
      s += r * r;
    }
    return s;
  };

  double ssr = ssr_at(a, b);
  double lambda = 1e-3;
  std::size_t iter = 0;
  bool converged = false;
  for (; iter < 200; ++iter) {
    // Normal equations of the damped Gauss-Newton step.
    double h11 = 0.0, h12 = 0.0, h22 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = 1.0 / (1.0 + std::exp((a - l[i]) / b));
      const double w = m * (1.0 - m);
      const double ja = -w / b;                    // d m / d a
      const double jb = w * (a - l[i]) / (b * b);  // d m / d b
      const double r = p_hat[i] - m;
      h11 += ja * ja;
      h12 += ja * jb;
      h22 += jb * jb;
      g1 += ja * r;
      g2 += jb * r;
    }
    bool accepted = false;
    for (std::size_t damp = 0; damp < 40 && !accepted; ++damp) {
      const double d11 = h11 * (1.0 + lambda);
      const double d22 = h22 * (1.0 + lambda);
      const double det = d11 * d22 - h12 * h12;
      if (!(std::abs(det) > 1e-300)) {
        lambda *= 10.0;
        continue;
      }
      double da = (g1 * d22 - g2 * h12) / det;
      double db = (g2 * d11 - g1 * h12) / det;
      for (std::size_t halve = 0; halve < 60 && b + db <= 0.0; ++halve) {
        da *= 0.5;
        db *= 0.5;
      }
      if (b + db <= 0.0) {
        lambda *= 10.0;
        continue;
      }
      const double ssr_new = ssr_at(a + da, b + db);
      if (ssr_new <= ssr) {
        a += da;
        b += db;
        const double step = std::max(std::abs(da), std::abs(db));
        converged = step < 1e-10 * (1.0 + std::max(std::abs(a), std::abs(b)));
        ssr = ssr_new;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted || converged) break;
  }

  SigmoidFit fit;
  fit.a = a;
  fit.b = b;
  fit.sigma0 = sigma0;
  fit.residual = ssr;
  fit.iterations = iter + 1;
  fit.converged = converged;
  return fit;
}

SigmoidFit fit_sigmoid(std::span<const FiringProbRow> table, double sigma0) {
  std::vector<double> l(table.size());
  std::vector<double> p(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    l[i] = table[i].l;
    p[i] = table[i].p_hat;
  }
  return fit_sigmoid(l, p, sigma0);
}

SigmoidFit transform_fit(const SigmoidFit& fit, const NormalForm& nf) {
  // The probe coordinate l lives on the segment (0, -l) below the rest
  // state; in rotation coordinates that segment has length |Q^-1 (0, 1)| * l.
  const Vec2 image = nf.Q_inv * Vec2{0.0, 1.0};
  const double scale = norm(image);
  SigmoidFit out = fit;
  out.a_star = scale * fit.a;
  out.b_star = scale * fit.b;
  return out;
}

double hazard_rate(const SigmoidFit& fit, double nu, double r) {
  if (r < 0.0) throw std::invalid_argument("hazard rate needs a non-negative radius");
  if (!(fit.b_star > 0.0)) throw std::invalid_argument("fit has no rotation-scale parameters");
  return (nu / kTwoPi) / (1.0 + std::exp((fit.a_star - r) / fit.b_star));
}

std::vector<double> density_time_grid(double t_max, std::size_t n_points) {
  if (!(t_max > 0.0) || n_points < 2) throw std::invalid_argument("bad density grid shape");
  std::vector<double> grid(n_points);
  for (std::size_t j = 0; j < n_points; ++j) {
    grid[j] = t_max * static_cast<double>(j) / static_cast<double>(n_points - 1);
  }
  return grid;
}

std::vector<DensityPoint> isi_density(const LifModel& model, const SigmoidFit& fit,
                                      std::span<const double> t_grid, std::size_t M,
                                      std::size_t n, std::uint64_t seed, double h) {
  require_grid(t_grid);
  if (M == 0) throw std::invalid_argument("need at least one density path");
  if (n < 2) throw std::invalid_argument("need at least 2 trapezoid subintervals");
  if (h <= 0.0) throw std::invalid_argument("step size must be positive");
  if (!(fit.b_star > 0.0)) throw std::invalid_argument("fit has no rotation-scale parameters");

  const double t_max = t_grid.back();
  const auto n_steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t_max / h)));
  const double sqrt_h = std::sqrt(h);
  // Same singularity handling as LifModel::make_sde: drift floored one step
  // away from 0, reflection after the step.
  const double floor = std::max(0.5 * model.sigma_eff * sqrt_h, 1e-300);

  std::vector<double> radius(n_steps + 1);
  std::vector<double> sum(t_grid.size(), 0.0);
  std::vector<double> sumsq(t_grid.size(), 0.0);

  const auto alpha = [&](double r) { return hazard_rate(fit, model.nu, r); };

  for (std::size_t m = 0; m < M; ++m) {
    GaussianStream gauss(seed, stream_for(StreamPurpose::isi_density,
                                          lif_kind_index(model.kind), m));
    double r = model.reset_state;
    radius[0] = r;
    for (std::size_t k = 0; k < n_steps; ++k) {
      const double t = static_cast<double>(k) * h;
      const double dW = gauss.next() * sqrt_h;
      r += model.drift(std::max(r, floor), t) * h + model.diffusion(t) * dW;
      r = std::abs(r);
      radius[k + 1] = r;
    }
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
      const double t_j = t_grid[j];
      double y;
      if (t_j == 0.0) {
        y = alpha(radius[0]);
      } else {
        const double step = t_j / static_cast<double>(n);
        double prev = alpha(sample_at(radius, h, 0.0));
        double integral = 0.0;
        double cur = prev;
        for (std::size_t i = 1; i <= n; ++i) {
          cur = alpha(sample_at(radius, h, static_cast<double>(i) * step));
          integral += 0.5 * (prev + cur) * step;
          prev = cur;
        }
        y = cur * std::exp(-integral);
      }
      sum[j] += y;
      sumsq[j] += y * y;
    }
  }

  std::vector<DensityPoint> out(t_grid.size());
  const auto dm = static_cast<double>(M);
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    const double g = sum[j] / dm;
    double se = 0.0;
    if (M > 1) {
      const double var = std::max(0.0, (sumsq[j] - dm * g * g) / (dm - 1.0));
      se = std::sqrt(var / dm);
    }
    out[j] = {t_grid[j], g, se};
  }
  return out;
}

double density_mass(std::span<const DensityPoint> density) {
  if (density.size() < 2) return 0.0;
  const auto cdf = integrate_density(density);
  return cdf.back();
}

IsiSample isi_histogram(const FhnParams& params, std::size_t n_trials, std::uint64_t seed,
                        const IsiOptions& options) {
  validate_params(params);
  if (n_trials == 0) throw std::invalid_argument("need at least one trial");
  if (options.h <= 0.0 || options.t_max <= 0.0) {
    throw std::invalid_argument("step size and horizon must be positive");
  }
  const FixedPoint fp = fixed_point(params);
  const Vec2 rest = fp.state();

  IsiSample sample;
  sample.t_max = options.t_max;
  if (params.noise.sigma0 == 0.0) {
    // The rest state is an equilibrium of the noiseless flow: no path leaves
    // it, so every trial is censored without integration.
    sample.censored = n_trials;
    return sample;
  }

  const double sqrt_h = std::sqrt(options.h);
  const auto max_steps = static_cast<std::size_t>(std::ceil(options.t_max / options.h));
  sample.isis.reserve(n_trials);
  for (std::size_t trial = 0; trial < n_trials; ++trial) {
    GaussianStream gauss(seed, stream_for(StreamPurpose::isi_empirical, 0, trial));
    State x = rest;
    bool fired = false;
    for (std::size_t k = 0; k < max_steps; ++k) {
      const State next = fhn_heun_step(params, x, options.h, gauss.next() * sqrt_h);
      if (detail::state_out_of_bounds(next)) {
        throw BlowUpError(k, static_cast<double>(k + 1) * options.h);
      }
      if (x[0] < 0.0 && next[0] >= 0.0) {
        const double theta = -x[0] / (next[0] - x[0]);
        sample.isis.push_back((static_cast<double>(k) + theta) * options.h);
        fired = true;
        break;
      }
      x = next;
    }
    if (!fired) ++sample.censored;
  }
  return sample;
}

double ks_distance(const IsiSample& sample, std::span<const DensityPoint> density) {
  if (density.size() < 2) throw std::invalid_argument("density grid too short");
  const std::size_t total = sample.isis.size() + sample.censored;
  if (total == 0) throw std::invalid_argument("empty sample");

  std::vector<double> sorted(sample.isis);
  std::sort(sorted.begin(), sorted.end());
  const auto cdf = integrate_density(density);
  const auto denom = static_cast<double>(total);

  const auto empirical = [&](double t) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
    return static_cast<double>(it - sorted.begin()) / denom;
  };

  double d = 0.0;
  for (std::size_t j = 0; j < density.size(); ++j) {
    d = std::max(d, std::abs(empirical(density[j].t) - cdf[j]));
  }
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double t = sorted[i];
    if (t < density.front().t || t > density.back().t) continue;
    const double model_cdf = interp_cdf(density, cdf, t);
    d = std::max(d, std::abs(static_cast<double>(i) / denom - model_cdf));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / denom - model_cdf));
  }
  return d;
}

double ks_distance(std::span<const DensityPoint> d1, std::span<const DensityPoint> d2) {
  if (d1.size() != d2.size() || d1.size() < 2) {
    throw std::invalid_argument("densities must share one grid");
  }
  for (std::size_t j = 0; j < d1.size(); ++j) {
    if (std::abs(d1[j].t - d2[j].t) > 1e-12 * std::max(1.0, std::abs(d1[j].t))) {
      throw std::invalid_argument("densities must share one grid");
    }
  }
  const auto c1 = integrate_density(d1);
  const auto c2 = integrate_density(d2);
  double d = 0.0;
  for (std::size_t j = 0; j < c1.size(); ++j) d = std::max(d, std::abs(c1[j] - c2[j]));
  return d;
}

IsiResult run_isi_comparison(const FhnParams& params, std::uint64_t seed,
                             const IsiComparisonOptions& options) {
  const FixedPoint fp = fixed_point(params);
  const NormalForm nf = normal_form(params, fp);

  IsiResult result;
  result.M = options.M;
  result.n = options.n;

  const FiringProbeGrid grid = FiringProbeGrid::for_params(params, fp, options.firing_trials);
  FiringOptions fopts;
  fopts.h = options.h;
  const auto table = estimate_firing_prob(params, grid, seed, fopts);
  result.fit = transform_fit(fit_sigmoid(table, params.noise.sigma0), nf);

  IsiOptions iopts;
  iopts.h = options.h;
  result.sample = isi_histogram(params, options.n_trials, seed, iopts);

  const auto t_grid = density_time_grid(options.t_max, options.grid_points);
  const LifModel radial = radial_ou_model(params);
  const LifModel polar = polar_radial_model(params);
  result.density_radial_ou =
      isi_density(radial, result.fit, t_grid, options.M, options.n, seed, options.h);
  result.density_polar =
      isi_density(polar, result.fit, t_grid, options.M, options.n, seed, options.h);

  result.ks_empirical_radial_ou = ks_distance(result.sample, result.density_radial_ou);
  result.ks_empirical_polar = ks_distance(result.sample, result.density_polar);
  result.ks_models = ks_distance(result.density_radial_ou, result.density_polar);
  result.mass_radial_ou = density_mass(result.density_radial_ou);
  result.mass_polar = density_mass(result.density_polar);
  return result;
}

}  // namespace fhn
