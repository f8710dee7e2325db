// End-to-end acceptance checks. Each numbered block verifies one published
// property of the toolkit at full scale and prints a PASS/FAIL line; the
// process exits with the number of failed blocks. --quick shrinks the trial
// counts for smoke runs (looser first-firing tolerance, same structure).

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <numbers>
#include <string>
#include <vector>

#include "fhn/attractor.hpp"
#include "fhn/brownian.hpp"
#include "fhn/firing.hpp"
#include "fhn/lif.hpp"
#include "fhn/linearize.hpp"
#include "fhn/mat2.hpp"
#include "fhn/model.hpp"
#include "fhn/rng.hpp"
#include "fhn/sde.hpp"
#include "fhn/spectral.hpp"
#include "fhn/stats.hpp"

using namespace fhn;

namespace {

constexpr std::uint64_t kSeed = 42;

struct Report {
  int failures = 0;

  void line(int index, const char* name, bool ok, const std::string& detail) {
    std::printf("[criterion %d] %s — %s: %s\n", index, ok ? "PASS" : "FAIL", name,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// --- 1: rest state and eigenstructure --------------------------------------

void criterion_rest_state(Report& report) {
  const FhnParams params;
  const FixedPoint fp = fixed_point(params);
  const ExcitableReport reg = validate_excitable(params);
  const double ratio = fp.mu / fp.nu;
  const bool ok = std::abs(fp.v_e - (-1.00125)) < 1e-5 &&
                  std::abs(fp.w_e - (-0.401665)) < 1e-5 &&
                  std::abs(fp.mu - 0.0312496) < 1e-4 &&
                  std::abs(fp.nu - 0.281378) < 1e-4 &&
                  std::abs(ratio - 0.111059) < 1e-4 && reg.pass;
  report.line(1, "rest state and eigenstructure", ok,
              fmt("v_e=%.8f w_e=%.8f mu=%.7f nu=%.6f mu/nu=%.6f excitable=%s", fp.v_e, fp.w_e,
                  fp.mu, fp.nu, ratio, reg.pass ? "yes" : "no"));
}

// --- 2: rotation-coordinate constants are regenerated ----------------------

void criterion_rotation_constants(Report& report) {
  FhnParams params;
  params.noise.sigma0 = 0.01;
  const NormalForm nf = normal_form(params);
  const double s0 = params.noise.sigma0;
  const double h_norm_sq = norm_sq(nf.h_e) / (s0 * s0);
  const double h1 = nf.h_e[0] / s0;
  const double h2 = nf.h_e[1] / s0;
  const double scale = norm(nf.Q_inv * Vec2{0.0, 1.0});
  const bool ok = std::abs(h_norm_sq - 157.881) < 0.05 && std::abs(h1 - 1.27722) < 1e-2 &&
                  std::abs(h2 - 12.5) < 1e-2 && std::abs(scale - 12.565) < 1e-3;
  report.line(2, "rotation-coordinate constants", ok,
              fmt("|h|^2/s0^2=%.4f h/s0=(%.5f, %.4f) scale=%.5f", h_norm_sq, h1, h2, scale));
}

// --- 3: regenerated sigmoid-fit table ---------------------------------------

void criterion_fit_table(Report& report, bool quick) {
  struct Reference {
    double sigma0, a, b;
  };
  const std::vector<Reference> refs{
      {0.001, 0.050161, 0.001028}, {0.005, 0.049816, 0.005281}, {0.01, 0.048559, 0.011068}};
  const std::size_t trials = quick ? 100 : 1000;

  std::vector<double> sigmas, bs;
  std::string msg;
  bool ok = true;
  for (std::size_t idx = 0; idx < refs.size(); ++idx) {
    FhnParams params;
    params.noise.sigma0 = refs[idx].sigma0;
    const FixedPoint fp = fixed_point(params);
    const NormalForm nf = normal_form(params, fp);
    const FiringProbeGrid grid = FiringProbeGrid::for_params(params, fp, trials);
    const auto table = estimate_firing_prob(params, grid, kSeed + idx);
    const SigmoidFit fit = transform_fit(fit_sigmoid(table, params.noise.sigma0), nf);
    const bool row_ok =
        fit.converged && std::abs(fit.a - refs[idx].a) < 0.005 && std::abs(fit.b - refs[idx].b) < 0.003;
    ok = ok && row_ok;
    sigmas.push_back(refs[idx].sigma0);
    bs.push_back(fit.b);
    msg += fmt("s0=%.3f a=%.6f (ref %.6f) b=%.6f (ref %.6f)%s ", refs[idx].sigma0, fit.a,
                  refs[idx].a, fit.b, refs[idx].b, row_ok ? "" : " <-off");
  }
  const double rho = spearman_rho(sigmas, bs);
  ok = ok && rho >= 0.9;
  msg += fmt("spearman(b)=%.2f trials=%zu", rho, trials);
  report.line(3, "sigmoid-fit table reproduction", ok, msg);
}

// --- 4: first-firing-time agreement -----------------------------------------

void criterion_first_firing(Report& report, bool quick) {
  FhnParams params;
  params.noise.sigma0 = 0.01;
  IsiComparisonOptions opts;  // full-scale defaults: 1000 trials, M=1000, n=10
  if (quick) {
    opts.n_trials = 100;
    opts.M = 100;
    opts.firing_trials = 100;
  }
  const double ks_limit = quick ? 0.2 : 0.1;
  const IsiResult res = run_isi_comparison(params, kSeed, opts);
  const bool ks_ok = res.ks_empirical_radial_ou < ks_limit && res.ks_empirical_polar < ks_limit &&
                     res.ks_models < ks_limit;
  const bool mass_ok = res.mass_radial_ou >= 0.85 && res.mass_radial_ou <= 1.02 &&
                       res.mass_polar >= 0.85 && res.mass_polar <= 1.02;
  report.line(4, "first-firing-time agreement", ks_ok && mass_ok,
              fmt("KS(emp,avg)=%.4f KS(emp,polar)=%.4f KS(models)=%.4f (limit %.1f) "
                  "mass=(%.4f, %.4f) spikes=%zu censored=%zu",
                  res.ks_empirical_radial_ou, res.ks_empirical_polar, res.ks_models, ks_limit,
                  res.mass_radial_ou, res.mass_polar, res.sample.isis.size(),
                  res.sample.censored));
}

// --- 5: linearization error bounds ------------------------------------------

void criterion_linearization_bounds(Report& report, bool quick) {
  const std::size_t trials = quick ? 30 : 100;
  FhnParams params;
  params.noise.sigma0 = 0.01;

  double c_small = 0.0, c_large = 0.0;
  std::string msg;
  bool ok = true;
  for (double r : {0.05, 0.1, 0.2}) {
    const ApproxExperimentResult res = approximation_experiment(params, r, trials, kSeed);
    ok = ok && std::isfinite(res.ratio) && res.ratio > 0.0;
    if (r == 0.05) c_small = res.ratio;
    if (r == 0.2) c_large = res.ratio;
    msg += fmt("C(%.2f)=%.3f ", r, res.ratio);
  }
  ok = ok && c_small <= 2.0 * c_large;

  FhnParams mult = params;
  mult.noise.kind = NoiseKind::multiplicative;
  const LambdaCondition cond = lambda_condition(mult);
  const ApproxExperimentResult mres = approximation_experiment(mult, 0.1, trials, kSeed);
  ok = ok && cond.positive && mres.lambda_positive && std::isfinite(mres.ratio) &&
       mres.ratio >= 0.0;
  msg += fmt("| mult lambda=%.4f msq-ratio=%.3f ", cond.lambda, mres.ratio);

  // Noise threshold where the contraction margin changes sign.
  auto lambda_at = [&mult](double s) {
    FhnParams p = mult;
    p.noise.sigma0 = s;
    return lambda_condition(p).lambda;
  };
  double lo = 0.01, hi = 0.5;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (lambda_at(mid) > 0.0 ? lo : hi) = mid;
  }
  const double threshold = 0.5 * (lo + hi);
  ok = ok && std::abs(threshold - 0.1243) / 0.1243 < 0.01;
  msg += fmt("| threshold=%.6f", threshold);
  report.line(5, "linearization error bounds", ok, msg);
}

// --- 6: attractor contraction properties ------------------------------------

void criterion_attractor(Report& report, bool quick) {
  FhnParams params;
  params.noise.sigma0 = 0.01;
  const FixedPoint fp = fixed_point(params);
  bool ok = true;
  std::string msg;

  // Cocycle identity on the integration grid.
  const BrownianPath path =
      brownian_path(kSeed, stream_for(StreamPurpose::engine_test, 40, 0), 0.01, 2000);
  const double cocycle = cocycle_check(params, {fp.v_e + 0.3, fp.w_e + 0.3}, path, 10.0, 10.0);
  ok = ok && cocycle < 1e-9;
  msg += fmt("cocycle=%.2e ", cocycle);

  // Pathwise energy domination.
  const std::size_t n_paths = quick ? 20 : 100;
  const ComparisonResult comp = comparison_principle_check(params, kSeed, n_paths);
  ok = ok && comp.violations == 0;
  msg += fmt("domination %zu/%zu paths clean ", n_paths - comp.violations, n_paths);

  // Pullback contraction over an ensemble of driving paths.
  const std::size_t n_seeds = quick ? 20 : 100;
  const std::vector<Vec2> starts{fp.state(), {3.0, 2.0}, {-4.0, -2.5}, {1.5, -3.0}};
  const std::vector<double> horizons{50.0, 100.0, 200.0, 400.0, 800.0};
  std::vector<std::vector<double>> seps(horizons.size());
  std::size_t converged = 0;
  for (std::size_t s = 0; s < n_seeds; ++s) {
    const PullbackResult res = pullback_experiment(params, starts, horizons, 1000 + s);
    for (std::size_t k = 0; k < horizons.size(); ++k) seps[k].push_back(res.separations[k]);
    if (res.separations.back() < 1e-2) ++converged;
  }
  bool median_decay = true;
  double prev_median = 1e300;
  for (auto& column : seps) {
    const double m = median(column);
    median_decay = median_decay && m <= prev_median * (1.0 + 1e-12);
    prev_median = m;
  }
  const double frac = static_cast<double>(converged) / static_cast<double>(n_seeds);
  ok = ok && median_decay && frac >= 0.95;
  msg += fmt("pullback converged %zu/%zu median-decay=%s final-median=%.2e ", converged,
                n_seeds, median_decay ? "yes" : "no", prev_median);

  // Environment averages for the multiplicative absorption argument.
  FhnParams mult = params;
  mult.noise.kind = NoiseKind::multiplicative;
  const StationaryOuPath z = stationary_ou(
      kSeed, stream_for(StreamPurpose::stationary, 40, 0), 0.01, -10000.0, 0.0, 1.0);
  const BirkhoffResult birkhoff = birkhoff_q_average(mult, z);
  const bool birkhoff_ok = std::abs(birkhoff.mean - (-0.015)) <= 3.0 * birkhoff.se;
  const StationaryOuPath zt = stationary_ou(
      kSeed, stream_for(StreamPurpose::stationary, 41, 0), 0.01, 0.0, 10000.0, 1.0);
  const TemperednessResult tempered = temperedness_check(zt, mult.noise.sigma0);
  const bool tempered_ok = tempered.estimate < 1e-2;
  ok = ok && birkhoff_ok && tempered_ok;
  msg += fmt("birkhoff=%.5f+-%.5f tempered=%.2e", birkhoff.mean, birkhoff.se,
                tempered.estimate);
  report.line(6, "attractor contraction properties", ok, msg);
}

// --- 7: integrator numerics --------------------------------------------------

SdeSystem scalar_ou_strat() {
  SdeSystem system;
  system.dim = 1;
  system.interpretation = NoiseInterpretation::stratonovich;
  system.drift = [](const State& x, double) -> State { return {-x[0], 0.0}; };
  system.diffusion = [](const State&, double) -> State { return {1.0, 0.0}; };
  return system;
}

void criterion_engine(Report& report, bool quick) {
  bool ok = true;
  std::string msg;

  // Stationary variance of a scalar OU path.
  {
    const BrownianPath path =
        brownian_path(1, stream_for(StreamPurpose::engine_test, 10, 0), 0.01, 100000);
    const Trajectory traj = integrate(scalar_ou_strat(), {0.0, 0.0}, path);
    std::vector<double> xs;
    xs.reserve(traj.states.size());
    for (std::size_t i = 10000; i < traj.states.size(); ++i) xs.push_back(traj.states[i][0]);
    const double var = variance(xs);
    ok = ok && std::abs(var - 0.5) < 0.05;
    msg += fmt("OU var=%.4f ", var);
  }

  // Weak order one: bias of E[X_T^2] halves with the step, measured against
  // an exact discrete chain sharing the same Gaussians as control variate.
  {
    SdeSystem ito;
    ito.dim = 1;
    ito.interpretation = NoiseInterpretation::ito;
    ito.drift = [](const State& x, double) -> State { return {-x[0], 0.0}; };
    ito.diffusion = [](const State&, double) -> State { return {1.0, 0.0}; };
    const double T = 5.0;
    const std::size_t n_trials = quick ? 20000 : 40000;
    std::vector<double> biases;
    std::vector<double> dts{0.02, 0.01, 0.005};
    for (std::size_t di = 0; di < dts.size(); ++di) {
      const double dt = dts[di];
      const auto n_steps = static_cast<std::size_t>(std::llround(T / dt));
      const double decay = std::exp(-dt);
      const double exact_sd = std::sqrt((1.0 - std::exp(-2.0 * dt)) / 2.0);
      // The paired chain y reproduces the continuous OU marginals exactly at
      // the grid times, so E[x^2 - y^2] is the scheme bias of E[X_T^2] with
      // the Monte Carlo noise almost fully cancelled.
      double acc = 0.0;
      for (std::size_t trial = 0; trial < n_trials; ++trial) {
        GaussianStream gs(7, stream_for(StreamPurpose::engine_test, 11 + di, trial));
        State x{0.0, 0.0};
        double y = 0.0;
        for (std::size_t k = 0; k < n_steps; ++k) {
          const double xi = gs.next();
          x = detail::sde_step(ito, x, dt * static_cast<double>(k), dt, xi * std::sqrt(dt));
          y = decay * y + exact_sd * xi;
        }
        acc += x[0] * x[0] - y * y;
      }
      biases.push_back(std::abs(acc / static_cast<double>(n_trials)));
    }
    const double r1 = biases[0] / biases[1];
    const double r2 = biases[1] / biases[2];
    ok = ok && r1 > 1.6 && r1 < 2.4 && r2 > 1.6 && r2 < 2.4;
    msg += fmt("weak-ratios=(%.2f, %.2f) ", r1, r2);
  }

  // Strong convergence: halving the step halves the error of the
  // Stratonovich exponential against its closed form.
  {
    SdeSystem expo;
    expo.dim = 1;
    expo.interpretation = NoiseInterpretation::stratonovich;
    const double c = 0.5;
    expo.drift = [](const State&, double) -> State { return {0.0, 0.0}; };
    expo.diffusion = [c](const State& x, double) -> State { return {c * x[0], 0.0}; };
    double err_coarse = 0.0, err_fine = 0.0;
    const std::size_t n_paths = 300;
    for (std::size_t p = 0; p < n_paths; ++p) {
      const BrownianPath fine_path =
          brownian_path(21, stream_for(StreamPurpose::engine_test, 15, p), 1.0 / 2048, 2048);
      double b_total = 0.0;
      for (double inc : fine_path.increments) b_total += inc;
      const double exact = std::exp(c * b_total);
      const Trajectory coarse = integrate(expo, {1.0, 0.0}, coarsen(fine_path, 4));
      const Trajectory finer = integrate(expo, {1.0, 0.0}, coarsen(fine_path, 2));
      err_coarse += std::abs(coarse.states.back()[0] - exact);
      err_fine += std::abs(finer.states.back()[0] - exact);
    }
    const double ratio = err_coarse / err_fine;
    ok = ok && ratio > 1.5 && ratio < 2.6;
    msg += fmt("strong-ratio=%.2f ", ratio);
  }

  // Lorentzian spectrum of an OU process.
  {
    const double mu = 1.0, dt = 0.05;
    const std::size_t n = 80000;
    const BrownianPath path =
        brownian_path(37, stream_for(StreamPurpose::engine_test, 16, 0), dt, n);
    std::vector<double> series{0.0};
    series.reserve(n + 1);
    double x = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x += -mu * x * dt + path.increments[i];
      series.push_back(x);
    }
    const Psd psd = estimate_psd(series, dt, default_segment_len(series.size(), 64));
    std::vector<double> measured, lorentz;
    for (std::size_t i = 1; i < psd.freqs.size(); ++i) {
      const double f = psd.freqs[i];
      if (f > 0.125 / dt) break;
      const double omega = 2.0 * std::numbers::pi * f;
      measured.push_back(psd.power[i]);
      lorentz.push_back(2.0 / (mu * mu + omega * omega));
    }
    const double corr = pearson_r(measured, lorentz);
    ok = ok && corr >= 0.95;
    msg += fmt("lorentzian-r=%.3f ", corr);
  }

  // Deterministic dichotomy across the separatrix below the rest state.
  {
    FhnParams params;
    params.noise.sigma0 = 0.0;
    const FixedPoint fp = fixed_point(params);
    const BrownianPath path = brownian_path(1, 0, 0.01, 6000);
    const Trajectory sub = integrate(fhn_system(params), {fp.v_e, -0.45}, path);
    const Trajectory super = integrate(fhn_system(params), {fp.v_e, -0.46}, path);
    const bool no_spike = !detect_spike(sub).has_value();
    const bool spike = detect_spike(super).has_value();
    ok = ok && no_spike && spike;
    msg += fmt("dichotomy=%s/%s", no_spike ? "rest" : "SPIKE", spike ? "spike" : "REST");
  }

  report.line(7, "integrator numerics", ok, msg);
}

// --- 8: spectral agreement ----------------------------------------------------

void criterion_spectra(Report& report, bool quick) {
  FhnParams params;
  params.noise.sigma0 = 0.01;
  const double h = 0.01;
  const std::size_t n_seeds = quick ? 5 : 20;
  const FixedPoint fp = fixed_point(params);
  const NormalForm nf = normal_form(params, fp);
  const SdeSystem shifted = shifted_system(params, fp);
  const SdeSystem linear = linearized_system(params, fp);
  const SdeSystem frozen = additive_linear_system(params, fp);

  // Subthreshold fluctuation spectra, shifted vs linearized dynamics.
  const double t_short = 50.0;
  const auto n_short = static_cast<std::size_t>(std::llround(t_short / h));
  const std::size_t seg_short = default_segment_len(n_short + 1);
  std::vector<Psd> ens_shifted, ens_linear;
  std::size_t attempt = 0;
  while (ens_shifted.size() < n_seeds && attempt < 3 * n_seeds) {
    const BrownianPath path =
        brownian_path(kSeed, stream_for(StreamPurpose::spectral, 0, attempt), h, n_short);
    ++attempt;
    const Trajectory a = integrate(shifted, {0.0, 0.0}, path);
    double sup = 0.0;
    for (const auto& s : a.states) sup = std::max(sup, norm(s));
    if (sup > 0.6) continue;  // excursion: outside the subthreshold regime
    const Trajectory b = integrate(linear, {0.0, 0.0}, path);
    std::vector<double> va(a.states.size()), vb(b.states.size());
    for (std::size_t k = 0; k < a.states.size(); ++k) va[k] = a.states[k][0];
    for (std::size_t k = 0; k < b.states.size(); ++k) vb[k] = b.states[k][0];
    ens_shifted.push_back(estimate_psd(va, h, seg_short));
    ens_linear.push_back(estimate_psd(vb, h, seg_short));
  }
  const double overlap_dynamics =
      ens_shifted.empty()
          ? 0.0
          : spectral_overlap(average_psd(ens_shifted), average_psd(ens_linear));

  // Radius-process spectra: |Y| in rotation coordinates, the polar radial
  // reduction, and the rotation-averaged closed form.
  const double t_long = quick ? 200.0 : 1000.0;
  const auto n_long = static_cast<std::size_t>(std::llround(t_long / h));
  const std::size_t seg_long = default_segment_len(n_long + 1);
  const LifModel polar = polar_radial_model(params);
  const double start = radial_ou_model(params).drift_root();
  std::vector<Psd> ens_norm, ens_polar, ens_avg;
  for (std::size_t s = 0; s < n_seeds; ++s) {
    const BrownianPath p1 =
        brownian_path(kSeed, stream_for(StreamPurpose::spectral, 1, s), h, n_long);
    const Trajectory ty = integrate(frozen, {0.0, 0.0}, p1);
    std::vector<double> ynorm(ty.states.size());
    for (std::size_t k = 0; k < ty.states.size(); ++k) ynorm[k] = norm(nf.Q_inv * ty.states[k]);
    ens_norm.push_back(estimate_psd(ynorm, h, seg_long));

    const BrownianPath p2 =
        brownian_path(kSeed, stream_for(StreamPurpose::spectral, 2, s), h, n_long);
    const Trajectory tr = integrate(polar.make_sde(h), {start, 0.0}, p2);
    std::vector<double> r(tr.states.size());
    for (std::size_t k = 0; k < tr.states.size(); ++k) r[k] = tr.states[k][0];
    ens_polar.push_back(estimate_psd(r, h, seg_long));

    const double ds = polar.mu * h;
    const BrownianPath b1 =
        brownian_path(kSeed, stream_for(StreamPurpose::spectral, 3, s), ds, n_long);
    const BrownianPath b2 =
        brownian_path(kSeed, stream_for(StreamPurpose::spectral, 4, s), ds, n_long);
    const AveragedTrajectory avg = averaged_process(params, b1, b2, {start, 0.0});
    std::vector<double> anorm(avg.y_app.size());
    for (std::size_t k = 0; k < avg.y_app.size(); ++k) anorm[k] = norm(avg.y_app[k]);
    ens_avg.push_back(estimate_psd(anorm, h, seg_long));
  }
  const Psd psd_norm = average_psd(ens_norm);
  const Psd psd_polar = average_psd(ens_polar);
  const Psd psd_avg = average_psd(ens_avg);
  const double o_np = spectral_overlap(psd_norm, psd_polar);
  const double o_na = spectral_overlap(psd_norm, psd_avg);
  const double o_pa = spectral_overlap(psd_polar, psd_avg);

  const bool ok =
      overlap_dynamics >= 0.9 && o_np >= 0.9 && o_na >= 0.9 && o_pa >= 0.9;
  report.line(8, "spectral agreement", ok,
              fmt("shifted-vs-linearized=%.4f norm-vs-polar=%.4f norm-vs-averaged=%.4f "
                  "polar-vs-averaged=%.4f (seeds=%zu)",
                  overlap_dynamics, o_np, o_na, o_pa, ens_shifted.size()));
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--quick") quick = true;
  }
  std::printf("acceptance checks (%s mode)\n", quick ? "quick" : "full");

  Report report;
  const auto guard = [&report, quick](int index, const char* name, auto&& fn) {
    try {
      fn(report, quick);
    } catch (const std::exception& e) {
      report.line(index, name, false, std::string("exception: ") + e.what());
    }
  };

  guard(1, "rest state and eigenstructure",
        [](Report& r, bool) { criterion_rest_state(r); });
  guard(2, "rotation-coordinate constants",
        [](Report& r, bool) { criterion_rotation_constants(r); });
  guard(3, "sigmoid-fit table reproduction",
        [](Report& r, bool q) { criterion_fit_table(r, q); });
  guard(4, "first-firing-time agreement",
        [](Report& r, bool q) { criterion_first_firing(r, q); });
  guard(5, "linearization error bounds",
        [](Report& r, bool q) { criterion_linearization_bounds(r, q); });
  guard(6, "attractor contraction properties",
        [](Report& r, bool q) { criterion_attractor(r, q); });
  guard(7, "integrator numerics", [](Report& r, bool q) { criterion_engine(r, q); });
  guard(8, "spectral agreement", [](Report& r, bool q) { criterion_spectra(r, q); });

  std::printf("acceptance: %d/8 criteria passed\n", 8 - report.failures);
  return report.failures;
}
