#include "fhn/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "fhn/attractor.hpp"
#include "fhn/config.hpp"
#include "fhn/errors.hpp"
#include "fhn/firing.hpp"
#include "fhn/io.hpp"
#include "fhn/lif.hpp"
#include "fhn/linearize.hpp"
#include "fhn/model.hpp"
#include "fhn/rng.hpp"
#include "fhn/spectral.hpp"

namespace fhn {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma0;
  std::optional<std::string> noise;
  std::string out_dir = "out";
  bool quick = false;
};

constexpr std::uint64_t kDefaultSeed = 42;

Config base_config(const GlobalOptions& g, const std::string& command) {
  Config cfg;
  const FhnParams defaults;
  cfg.set_value("params.I", defaults.bias_current);
  cfg.set_value("params.alpha", defaults.alpha);
  cfg.set_value("params.beta", defaults.beta);
  cfg.set_value("params.epsilon", defaults.epsilon);
  cfg.set_value("params.sigma0", defaults.noise.sigma0);
  cfg.set("params.noise", "additive");
  cfg.set_value("run.seed", kDefaultSeed);
  cfg.set_value("run.h", 0.01);
  cfg.set_value("run.quick", false);

  if (!g.config_path.empty()) {
    // Keep the loaded file alive across the loop: entries() returns a
    // reference into the Config object.
    const Config file = Config::load(g.config_path);
    for (const auto& [key, value] : file.entries()) {
      cfg.set(key, value);
    }
  }
  if (g.seed) cfg.set_value("run.seed", *g.seed);
  if (g.sigma0) cfg.set_value("params.sigma0", *g.sigma0);
  if (g.noise) cfg.set("params.noise", *g.noise);
  if (g.quick) cfg.set_value("run.quick", true);
  cfg.set("run.command", command);
  return cfg;
}

FhnParams params_from(const Config& cfg) {
  FhnParams params;
  params.bias_current = cfg.get_double("params.I", params.bias_current);
  params.alpha = cfg.get_double("params.alpha", params.alpha);
  params.beta = cfg.get_double("params.beta", params.beta);
  params.epsilon = cfg.get_double("params.epsilon", params.epsilon);
  params.noise.sigma0 = cfg.get_double("params.sigma0", params.noise.sigma0);
  const std::string noise = cfg.get_string("params.noise", "additive");
  if (noise == "additive") {
    params.noise.kind = NoiseKind::additive;
  } else if (noise == "multiplicative") {
    params.noise.kind = NoiseKind::multiplicative;
  } else {
    throw std::invalid_argument("unknown noise kind: " + noise);
  }
  validate_params(params);
  return params;
}

/// Output directory content-addressed by the effective config; the manifest
/// echoes everything needed to regenerate the artifacts.
fs::path prepare_dir(const GlobalOptions& g, const Config& cfg) {
  const std::string command = cfg.get_string("run.command", "run");
  const fs::path dir = fs::path(g.out_dir) / (command + "-" + hex16(cfg.hash()));
  fs::create_directories(dir);

  json manifest;
  manifest["command"] = command;
  manifest["seed"] = cfg.get_uint("run.seed", kDefaultSeed);
  json jcfg = json::object();
  for (const auto& [key, value] : cfg.entries()) jcfg[key] = value;
  manifest["config"] = jcfg;
  manifest["versions"] = {{"artifact", kVersion}, {"compiler", __VERSION__}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return dir;
}

void write_json_file(const fs::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

json fit_to_json(const SigmoidFit& fit) {
  return json{{"a", fit.a},
              {"b", fit.b},
              {"a_star", fit.a_star},
              {"b_star", fit.b_star},
              {"sigma0", fit.sigma0},
              {"residual", fit.residual},
              {"iterations", fit.iterations},
              {"converged", fit.converged}};
}

// --- subcommands ---------------------------------------------------------

int cmd_fixed_point(const GlobalOptions& g) {
  const Config cfg = base_config(g, "fixed-point");
  const FhnParams params = params_from(cfg);
  const fs::path dir = prepare_dir(g, cfg);

  const FixedPoint fp = fixed_point(params);
  const ExcitableReport report = validate_excitable(params);
  const NormalForm nf = normal_form(params, fp);

  json j;
  j["v_e"] = fp.v_e;
  j["w_e"] = fp.w_e;
  j["mu"] = fp.mu;
  j["nu"] = fp.nu;
  j["ratio"] = report.ratio;
  j["delta"] = fp.delta;
  j["residual"] = fp.residual;
  j["complex_pair"] = fp.complex_pair;
  j["stable_focus"] = report.stable_focus;
  j["averaging_valid"] = report.averaging_valid;
  j["excitable"] = report.pass;
  j["h_e"] = {nf.h_e[0], nf.h_e[1]};
  j["sigma_eff"] = sigma_eff(params);
  const Vec2 image = nf.Q_inv * Vec2{0.0, 1.0};
  j["rotation_scale"] = norm(image);
  write_json_file(dir / "fixed_point.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_simulate(const GlobalOptions& g, double t_end_flag, double x0_v, double x0_w,
                 bool x0_set) {
  Config cfg = base_config(g, "simulate");
  const bool quick = cfg.get_bool("run.quick", false);
  if (t_end_flag > 0.0) cfg.set_value("simulate.t_end", t_end_flag);
  double t_end = cfg.get_double("simulate.t_end", 1000.0);
  if (quick) t_end = std::min(t_end, 100.0);
  cfg.set_value("simulate.t_end", t_end);
  const FhnParams params = params_from(cfg);
  const double h = cfg.get_double("run.h", 0.01);
  const std::uint64_t seed = cfg.get_uint("run.seed", kDefaultSeed);

  const FixedPoint fp = fixed_point(params);
  Vec2 x0 = fp.state();
  if (x0_set) x0 = {x0_v, x0_w};
  if (cfg.has("simulate.x0_v")) x0[0] = cfg.get_double("simulate.x0_v", x0[0]);
  if (cfg.has("simulate.x0_w")) x0[1] = cfg.get_double("simulate.x0_w", x0[1]);
  cfg.set_value("simulate.x0_v", x0[0]);
  cfg.set_value("simulate.x0_w", x0[1]);
  const fs::path dir = prepare_dir(g, cfg);

  const auto n_steps = static_cast<std::size_t>(std::llround(t_end / h));
  const BrownianPath path =
      brownian_path(seed, stream_for(StreamPurpose::generic, 0, 0), h, n_steps);
  const EventDetector spike_detector{EventKind::spike,
                                     [](const State& x) { return x[0]; }, false};
  const std::vector<EventDetector> detectors{spike_detector};
  const Trajectory trajectory = integrate(fhn_system(params), x0, path, detectors);

  write_trajectory_csv(dir / "trajectory.csv", trajectory);
  json j;
  j["steps"] = trajectory.steps();
  j["t_end"] = t_end;
  j["spikes"] = trajectory.events.size();
  j["constraint_hits"] = trajectory.constraint_hits;
  write_json_file(dir / "summary.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_linearize(const GlobalOptions& g) {
  Config cfg = base_config(g, "linearize");
  const bool quick = cfg.get_bool("run.quick", false);
  const auto trials = static_cast<std::size_t>(
      cfg.get_int("linearize.trials", quick ? 10 : 100));
  cfg.set_value("linearize.trials", trials);
  const FhnParams params = params_from(cfg);
  const std::uint64_t seed = cfg.get_uint("run.seed", kDefaultSeed);
  const fs::path dir = prepare_dir(g, cfg);

  const LambdaCondition lc = lambda_condition(params);
  json rows = json::array();
  std::vector<double> col_r, col_err, col_ratio, col_gamma;
  for (const double r : {0.05, 0.1, 0.2}) {
    const ApproxExperimentResult res = approximation_experiment(params, r, trials, seed);
    rows.push_back(json{{"r", res.r},
                        {"n_trials", res.n_trials},
                        {"error_stat", res.error_stat},
                        {"mean_sup", res.mean_sup},
                        {"gamma_r", res.gamma_r},
                        {"ratio", res.ratio},
                        {"mean_ratio", res.mean_ratio},
                        {"additive_linear_stat", res.additive_linear_stat},
                        {"al_ratio", res.al_ratio},
                        {"zero_tau_trials", res.zero_tau_trials},
                        {"capped_trials", res.capped_trials}});
    col_r.push_back(res.r);
    col_err.push_back(res.error_stat);
    col_ratio.push_back(res.ratio);
    col_gamma.push_back(res.gamma_r);
  }
  json j;
  j["rows"] = rows;
  j["lambda"] = lc.lambda;
  j["b1_gram_norm"] = lc.b1_gram_norm;
  j["lambda_positive"] = lc.positive;
  write_json_file(dir / "linearize.json", j);
  const std::vector<std::string> names{"r", "error_stat", "ratio", "gamma_r"};
  const std::vector<std::vector<double>> cols{col_r, col_err, col_ratio, col_gamma};
  write_csv(dir / "linearize.csv", names, cols);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_lif(const GlobalOptions& g) {
  Config cfg = base_config(g, "lif");
  const bool quick = cfg.get_bool("run.quick", false);
  double t_end = cfg.get_double("lif.t_end", quick ? 50.0 : 200.0);
  cfg.set_value("lif.t_end", t_end);
  const FhnParams params = params_from(cfg);
  const double h = cfg.get_double("run.h", 0.01);
  const std::uint64_t seed = cfg.get_uint("run.seed", kDefaultSeed);
  const fs::path dir = prepare_dir(g, cfg);

  const LifModel radial = radial_ou_model(params);
  const LifModel polar = polar_radial_model(params);
  const auto n_steps = static_cast<std::size_t>(std::llround(t_end / h));

  const BrownianPath p1 = brownian_path(seed, stream_for(StreamPurpose::lif, 0, 0), h, n_steps);
  const BrownianPath p2 = brownian_path(seed, stream_for(StreamPurpose::lif, 1, 0), h, n_steps);
  const double start = radial.drift_root();
  const Trajectory traj_ou = integrate(radial.make_sde(h), {start, 0.0}, p1);
  const Trajectory traj_polar = integrate(polar.make_sde(h), {start, 0.0}, p2);

  std::vector<double> t(n_steps + 1), r_ou(n_steps + 1), r_polar(n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k) {
    t[k] = traj_ou.time_at(k);
    r_ou[k] = traj_ou.states[k][0];
    r_polar[k] = traj_polar.states[k][0];
  }
  const std::vector<std::string> names{"t", "r_ou", "r_polar"};
  const std::vector<std::vector<double>> cols{t, r_ou, r_polar};
  write_csv(dir / "lif.csv", names, cols);

  // Rotation-averaged closed form over the same horizon (slow-time paths).
  const double ds = radial.mu * h;
  const BrownianPath b1 =
      brownian_path(seed, stream_for(StreamPurpose::lif, 2, 0), ds, n_steps);
  const BrownianPath b2 =
      brownian_path(seed, stream_for(StreamPurpose::lif, 2, 1), ds, n_steps);
  const AveragedTrajectory avg = averaged_process(params, b1, b2, {start, 0.0});
  std::vector<double> norms(avg.y_app.size());
  for (std::size_t k = 0; k < avg.y_app.size(); ++k) norms[k] = norm(avg.y_app[k]);
  const std::vector<std::string> anames{"t", "y_app_norm"};
  const std::vector<std::vector<double>> acols{avg.t, norms};
  write_csv(dir / "averaged.csv", anames, acols);

  json j;
  j["mu"] = radial.mu;
  j["nu"] = radial.nu;
  j["sigma_eff"] = radial.sigma_eff;
  j["drift_root"] = radial.drift_root();
  j["stationary_mean"] =
      radial.sigma_eff / std::sqrt(2.0 * radial.mu) * std::sqrt(std::numbers::pi / 2.0);
  j["constraint_hits_ou"] = traj_ou.constraint_hits;
  j["constraint_hits_polar"] = traj_polar.constraint_hits;
  write_json_file(dir / "lif.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_firing_prob(const GlobalOptions& g) {
  Config cfg = base_config(g, "firing-prob");
  const bool quick = cfg.get_bool("run.quick", false);
  const auto trials = static_cast<std::size_t>(
      cfg.get_int("firing.trials", quick ? 100 : 1000));
  cfg.set_value("firing.trials", trials);
  const FhnParams params = params_from(cfg);
  const std::uint64_t seed = cfg.get_uint("run.seed", kDefaultSeed);
  const fs::path dir = prepare_dir(g, cfg);

  const FixedPoint fp = fixed_point(params);
  const NormalForm nf = normal_form(params, fp);
  const FiringProbeGrid grid = FiringProbeGrid::for_params(params, fp, trials);
  FiringOptions fopts;
  fopts.h = cfg.get_double("run.h", 0.01);
  const auto table = estimate_firing_prob(params, grid, seed, fopts);

  std::vector<double> csigma, ci, cl, cp, cse;
  for (const auto& row : table) {
    csigma.push_back(params.noise.sigma0);
    ci.push_back(static_cast<double>(row.i));
    cl.push_back(row.l);
    cp.push_back(row.p_hat);
    cse.push_back(row.se);
  }
  const std::vector<std::string> names{"sigma0", "i", "l_i", "p_hat", "se"};
  const std::vector<std::vector<double>> cols{csigma, ci, cl, cp, cse};
  write_csv(dir / "firing_prob.csv", names, cols);

  const SigmoidFit fit = transform_fit(fit_sigmoid(table, params.noise.sigma0), nf);
  json j;
  j["delta"] = grid.delta;
  j["n_points"] = grid.n_points;
  j["trials_per_point"] = grid.trials_per_point;
  j["fit"] = fit_to_json(fit);
  write_json_file(dir / "firing_prob.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_fit_sigmoid(const GlobalOptions& g, const std::string& table_path) {
  Config cfg = base_config(g, "fit-sigmoid");
  cfg.set("fit.table", table_path);
  const FhnParams params = params_from(cfg);
  const fs::path dir = prepare_dir(g, cfg);

  const CsvTable table = read_csv(table_path);
  const bool has_li = std::find(table.column_names.begin(), table.column_names.end(),
                                "l_i") != table.column_names.end();
  const auto& l = table.column(has_li ? "l_i" : "l");
  const auto& p = table.column("p_hat");
  const NormalForm nf = normal_form(params);
  const SigmoidFit fit = transform_fit(fit_sigmoid(l, p, params.noise.sigma0), nf);

  const json j = fit_to_json(fit);
  write_json_file(dir / "fit_sigmoid.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_isi(const GlobalOptions& g) {
  Config cfg = base_config(g, "isi");
  const bool quick = cfg.get_bool("run.quick", false);
  IsiComparisonOptions opts;
  opts.n_trials = static_cast<std::size_t>(
      cfg.get_int("isi.trials", quick ? 100 : 1000));
  opts.M = static_cast<std::size_t>(cfg.get_int("isi.M", quick ? 100 : 1000));
  opts.n = static_cast<std::size_t>(cfg.get_int("isi.n", 10));
  opts.t_max = cfg.get_double("isi.t_max", 3000.0);
  opts.grid_points = static_cast<std::size_t>(cfg.get_int("isi.grid_points", 150));
  opts.firing_trials = static_cast<std::size_t>(
      cfg.get_int("firing.trials", quick ? 100 : 1000));
  opts.h = cfg.get_double("run.h", 0.01);
  cfg.set_value("isi.trials", opts.n_trials);
  cfg.set_value("isi.M", opts.M);
  cfg.set_value("isi.n", opts.n);
  cfg.set_value("isi.t_max", opts.t_max);
  cfg.set_value("isi.grid_points", opts.grid_points);
  cfg.set_value("firing.trials", opts.firing_trials);
  const FhnParams params = params_from(cfg);
  const std::uint64_t seed = cfg.get_uint("run.seed", kDefaultSeed);
  const fs::path dir = prepare_dir(g, cfg);

  const IsiResult result = run_isi_comparison(params, seed, opts);

  const std::vector<std::string> snames{"isi"};
  const std::vector<std::vector<double>> scols{result.sample.isis};
  write_csv(dir / "isi_samples.csv", snames, scols);
  const auto density_csv = [&](const fs::path& path,
                               const std::vector<DensityPoint>& density) {
    std::vector<double> t, gt, se;
    for (const auto& pt : density) {
      t.push_back(pt.t);
      gt.push_back(pt.g);
      se.push_back(pt.se);
    }
    const std::vector<std::string> names{"t", "g_t", "se"};
    const std::vector<std::vector<double>> cols{t, gt, se};
    write_csv(path, names, cols);
  };
  density_csv(dir / "density_radial_ou.csv", result.density_radial_ou);
  density_csv(dir / "density_polar.csv", result.density_polar);

  json j;
  j["n_isis"] = result.sample.isis.size();
  j["censored"] = result.sample.censored;
  j["M"] = result.M;
  j["n"] = result.n;
  j["fit"] = fit_to_json(result.fit);
  j["ks_empirical_radial_ou"] = result.ks_empirical_radial_ou;
  j["ks_empirical_polar"] = result.ks_empirical_polar;
  j["ks_models"] = result.ks_models;
  j["mass_radial_ou"] = result.mass_radial_ou;
  j["mass_polar"] = result.mass_polar;
  write_json_file(dir / "isi.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_psd(const GlobalOptions& g) {
  Config cfg = base_config(g, "psd");
  const bool quick = cfg.get_bool("run.quick", false);
  const auto n_seeds = static_cast<std::size_t>(
      cfg.get_int("psd.seeds", quick ? 5 : 20));
  cfg.set_value("psd.seeds", n_seeds);
  const double t_short = cfg.get_double("psd.t_short", 50.0);
  const double t_long = cfg.get_double("psd.t_long", quick ? 200.0 : 1000.0);
  cfg.set_value("psd.t_short", t_short);
  cfg.set_value("psd.t_long", t_long);
  const FhnParams params = params_from(cfg);
  const double h = cfg.get_double("run.h", 0.01);
  const std::uint64_t seed = cfg.get_uint("run.seed", kDefaultSeed);
  const fs::path dir = prepare_dir(g, cfg);

  const FixedPoint fp = fixed_point(params);
  const NormalForm nf = normal_form(params, fp);
  const SdeSystem shifted = shifted_system(params, fp);
  const SdeSystem linear = linearized_system(params, fp);
  const SdeSystem additive_linear = additive_linear_system(params, fp);

  // Short paths of the subthreshold fluctuation: v component, shifted vs
  // linearized, driven by one path per seed. Excursion seeds are skipped:
  // the comparison targets the subthreshold regime.
  const auto n_short = static_cast<std::size_t>(std::llround(t_short / h));
  const std::size_t seg_short = default_segment_len(n_short + 1);
  std::vector<Psd> ens_shifted, ens_linear;
  std::size_t attempt = 0;
  while (ens_shifted.size() < n_seeds && attempt < 3 * n_seeds) {
    const BrownianPath path =
        brownian_path(seed, stream_for(StreamPurpose::spectral, 0, attempt), h, n_short);
    ++attempt;
    const Trajectory a = integrate(shifted, {0.0, 0.0}, path);
    double sup = 0.0;
    for (const auto& x : a.states) sup = std::max(sup, norm(x));
    if (sup > 0.6) continue;  // excursion; not a subthreshold sample
    const Trajectory b = integrate(linear, {0.0, 0.0}, path);
    std::vector<double> va(a.states.size()), vb(b.states.size());
    for (std::size_t k = 0; k < a.states.size(); ++k) va[k] = a.states[k][0];
    for (std::size_t k = 0; k < b.states.size(); ++k) vb[k] = b.states[k][0];
    ens_shifted.push_back(estimate_psd(va, h, seg_short));
    ens_linear.push_back(estimate_psd(vb, h, seg_short));
  }
  if (ens_shifted.empty()) throw std::runtime_error("no subthreshold seeds found");
  const Psd psd_shifted = average_psd(ens_shifted);
  const Psd psd_linear = average_psd(ens_linear);
  const double overlap_shift_lin = spectral_overlap(psd_shifted, psd_linear);

  // Long paths of the three radial descriptions: |Y| of the linear system in
  // rotation coordinates, the polar radial reduction, and the rotation-
  // averaged closed form.
  const auto n_long = static_cast<std::size_t>(std::llround(t_long / h));
  const std::size_t seg_long = default_segment_len(n_long + 1);
  const LifModel polar = polar_radial_model(params);
  const double start = radial_ou_model(params).drift_root();
  std::vector<Psd> ens_norm, ens_polar, ens_avg;
  for (std::size_t s = 0; s < n_seeds; ++s) {
    const BrownianPath p1 =
        brownian_path(seed, stream_for(StreamPurpose::spectral, 1, s), h, n_long);
    const Trajectory ty = integrate(additive_linear, {0.0, 0.0}, p1);
    std::vector<double> ynorm(ty.states.size());
    for (std::size_t k = 0; k < ty.states.size(); ++k) {
      ynorm[k] = norm(nf.Q_inv * ty.states[k]);
    }
    ens_norm.push_back(estimate_psd(ynorm, h, seg_long));

    const BrownianPath p2 =
        brownian_path(seed, stream_for(StreamPurpose::spectral, 2, s), h, n_long);
    const Trajectory tr = integrate(polar.make_sde(h), {start, 0.0}, p2);
    std::vector<double> r(tr.states.size());
    for (std::size_t k = 0; k < tr.states.size(); ++k) r[k] = tr.states[k][0];
    ens_polar.push_back(estimate_psd(r, h, seg_long));

    const double ds = polar.mu * h;
    const BrownianPath b1 =
        brownian_path(seed, stream_for(StreamPurpose::spectral, 3, s), ds, n_long);
    const BrownianPath b2 =
        brownian_path(seed, stream_for(StreamPurpose::spectral, 4, s), ds, n_long);
    const AveragedTrajectory avg = averaged_process(params, b1, b2, {start, 0.0});
    std::vector<double> anorm(avg.y_app.size());
    for (std::size_t k = 0; k < avg.y_app.size(); ++k) anorm[k] = norm(avg.y_app[k]);
    ens_avg.push_back(estimate_psd(anorm, h, seg_long));
  }
  const Psd psd_norm = average_psd(ens_norm);
  const Psd psd_polar = average_psd(ens_polar);
  const Psd psd_avg = average_psd(ens_avg);

  {
    const std::vector<std::string> names{"freq", "shifted_v", "linearized_v"};
    const std::vector<std::vector<double>> cols{psd_shifted.freqs, psd_shifted.power,
                                                psd_linear.power};
    write_csv(dir / "psd_shifted_vs_linearized.csv", names, cols);
  }
  {
    const std::vector<std::string> names{"freq", "y_norm", "r_polar", "y_averaged"};
    const std::vector<std::vector<double>> cols{psd_norm.freqs, psd_norm.power,
                                                psd_polar.power, psd_avg.power};
    write_csv(dir / "psd_norms.csv", names, cols);
  }
  json j;
  j["overlap_shifted_linearized"] = overlap_shift_lin;
  j["overlap_norm_polar"] = spectral_overlap(psd_norm, psd_polar);
  j["overlap_norm_averaged"] = spectral_overlap(psd_norm, psd_avg);
  j["overlap_polar_averaged"] = spectral_overlap(psd_polar, psd_avg);
  j["subthreshold_seeds"] = ens_shifted.size();
  j["attempts"] = attempt;
  write_json_file(dir / "psd.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_verify(const GlobalOptions& g) {
  Config cfg = base_config(g, "verify");
  const bool quick = cfg.get_bool("run.quick", false);
  const double window = cfg.get_double("verify.window", quick ? 1000.0 : 10000.0);
  cfg.set_value("verify.window", window);
  const FhnParams params = params_from(cfg);
  const double h = cfg.get_double("run.h", 0.01);
  const std::uint64_t seed = cfg.get_uint("run.seed", kDefaultSeed);
  const fs::path dir = prepare_dir(g, cfg);

  const FixedPoint fp = fixed_point(params);

  // Cocycle identity on one path.
  const auto n_cocycle = static_cast<std::size_t>(std::llround(20.0 / h));
  const BrownianPath path =
      brownian_path(seed, stream_for(StreamPurpose::engine_test, 0, 0), h, n_cocycle);
  const Vec2 x0{fp.v_e + 0.3, fp.w_e + 0.3};
  const double cocycle_dev = cocycle_check(params, x0, path, 10.0, 10.0);

  // Absorption radius for the additive transformation.
  FhnParams additive = params;
  additive.noise.kind = NoiseKind::additive;
  const StationaryOuPath eta =
      stationary_ou(seed, stream_for(StreamPurpose::stationary, 1, 0), h, -500.0, 0.0,
                    additive.noise.sigma0);
  const AbsorptionRadius radius = absorption_radius_additive(additive, eta);

  // Pullback separations.
  const std::vector<Vec2> x_set{fp.state(), fp.state() + Vec2{0.3, 0.3}};
  const std::vector<double> horizons =
      quick ? std::vector<double>{50.0, 200.0} : std::vector<double>{50.0, 200.0, 800.0};
  const PullbackResult pullback = pullback_experiment(params, x_set, horizons, seed, h);

  // Birkhoff average and temperedness of the multiplicative driver.
  const StationaryOuPath z = stationary_ou(
      seed, stream_for(StreamPurpose::stationary, 2, 0), h, 0.0, window, 1.0);
  const BirkhoffResult birkhoff = birkhoff_q_average(params, z);
  const TemperednessResult tempered = temperedness_check(z, params.noise.sigma0);

  json j;
  j["cocycle_dev"] = cocycle_dev;
  j["R_star"] = radius.r_star;
  json jp = json::array();
  for (std::size_t i = 0; i < pullback.times.size(); ++i) {
    jp.push_back({pullback.times[i], pullback.separations[i]});
  }
  j["pullback"] = jp;
  j["birkhoff_avg"] = birkhoff.mean;
  j["tempered_est"] = tempered.estimate;
  write_json_file(dir / "verify.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_fit_table(const GlobalOptions& g) {
  Config cfg = base_config(g, "fit-table");
  const bool quick = cfg.get_bool("run.quick", false);
  const auto trials = static_cast<std::size_t>(
      cfg.get_int("firing.trials", quick ? 100 : 1000));
  cfg.set_value("firing.trials", trials);
  const FhnParams base = params_from(cfg);
  const std::uint64_t seed = cfg.get_uint("run.seed", kDefaultSeed);

  std::vector<double> sigmas;
  if (g.sigma0) {
    sigmas = {*g.sigma0};
  } else {
    sigmas = {0.001, 0.002, 0.003, 0.004, 0.005, 0.006, 0.007, 0.008, 0.009, 0.01, 0.015};
  }
  const fs::path dir = prepare_dir(g, cfg);

  json rows = json::array();
  std::vector<double> cs, ca, cb, cas, cbs;
  for (std::size_t idx = 0; idx < sigmas.size(); ++idx) {
    FhnParams params = base;
    params.noise.sigma0 = sigmas[idx];
    const FixedPoint fp = fixed_point(params);
    const NormalForm nf = normal_form(params, fp);
    const FiringProbeGrid grid = FiringProbeGrid::for_params(params, fp, trials);
    // Column-specific seed: columns are statistically independent runs.
    const auto table = estimate_firing_prob(params, grid, seed + idx, {});
    const SigmoidFit fit = transform_fit(fit_sigmoid(table, params.noise.sigma0), nf);
    json row = fit_to_json(fit);
    rows.push_back(row);
    cs.push_back(sigmas[idx]);
    ca.push_back(fit.a);
    cb.push_back(fit.b);
    cas.push_back(fit.a_star);
    cbs.push_back(fit.b_star);
  }
  json j;
  j["rows"] = rows;
  j["trials_per_point"] = trials;
  write_json_file(dir / "fit_table.json", j);
  const std::vector<std::string> names{"sigma0", "a", "b", "a_star", "b_star"};
  const std::vector<std::vector<double>> cols{cs, ca, cb, cas, cbs};
  write_csv(dir / "fit_table.csv", names, cols);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int emit_error(const char* type, const std::exception& e) {
  json j;
  j["error"] = {{"type", type}, {"message", e.what()}};
  std::cout << j.dump(2) << "\n";
  return 1;
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const BlowUpError& e) {
    return emit_error("blow-up", e);
  } catch (const NotUniqueFixedPointError& e) {
    return emit_error("not-unique-fixed-point", e);
  } catch (const UnsupportedRegimeError& e) {
    return emit_error("unsupported-regime", e);
  } catch (const FitFailureError& e) {
    return emit_error("fit-failure", e);
  } catch (const std::invalid_argument& e) {
    return emit_error("invalid-argument", e);
  } catch (const std::exception& e) {
    return emit_error("error", e);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"stochastic neuron-model experiment driver"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "configuration file (key = value lines)");
  std::uint64_t seed_flag = 0;
  auto* seed_opt = app.add_option("--seed", seed_flag, "base RNG seed");
  double sigma0_flag = 0.0;
  auto* sigma0_opt = app.add_option("--sigma0", sigma0_flag, "noise amplitude");
  std::string noise_flag;
  app.add_option("--noise", noise_flag, "noise kind: additive | multiplicative")
      ->check(CLI::IsMember({"additive", "multiplicative"}));
  app.add_option("--out", g.out_dir, "output root directory");
  app.add_flag("--quick", g.quick, "reduced trial counts for smoke runs");

  int exit_code = 0;
  const auto finalize_globals = [&] {
    if (seed_opt->count() > 0) g.seed = seed_flag;
    if (sigma0_opt->count() > 0) g.sigma0 = sigma0_flag;
    if (!noise_flag.empty()) g.noise = noise_flag;
  };

  auto* fixed_point_cmd = app.add_subcommand("fixed-point", "rest state and eigenstructure");
  fixed_point_cmd->fallthrough();
  fixed_point_cmd->callback([&] {
    finalize_globals();
    exit_code = guarded([&] { return cmd_fixed_point(g); });
  });

  auto* simulate_cmd = app.add_subcommand("simulate", "integrate the full model");
  simulate_cmd->fallthrough();
  double t_end_flag = 0.0;
  double x0_v = 0.0, x0_w = 0.0;
  auto* x0v_opt = simulate_cmd->add_option("--x0-v", x0_v, "initial v");
  auto* x0w_opt = simulate_cmd->add_option("--x0-w", x0_w, "initial w");
  simulate_cmd->add_option("--t-end", t_end_flag, "horizon");
  simulate_cmd->callback([&] {
    finalize_globals();
    const bool x0_set = x0v_opt->count() > 0 || x0w_opt->count() > 0;
    exit_code = guarded([&] { return cmd_simulate(g, t_end_flag, x0_v, x0_w, x0_set); });
  });

  auto* linearize_cmd = app.add_subcommand("linearize", "linearization-error experiments");
  linearize_cmd->fallthrough();
  linearize_cmd->callback([&] {
    finalize_globals();
    exit_code = guarded([&] { return cmd_linearize(g); });
  });

  auto* lif_cmd = app.add_subcommand("lif", "radial reductions and averaged process");
  lif_cmd->fallthrough();
  lif_cmd->callback([&] {
    finalize_globals();
    exit_code = guarded([&] { return cmd_lif(g); });
  });

  auto* firing_cmd = app.add_subcommand("firing-prob", "firing probability probe grid");
  firing_cmd->fallthrough();
  firing_cmd->callback([&] {
    finalize_globals();
    exit_code = guarded([&] { return cmd_firing_prob(g); });
  });

  auto* fit_cmd = app.add_subcommand("fit-sigmoid", "fit a firing-probability table");
  fit_cmd->fallthrough();
  std::string table_path;
  fit_cmd->add_option("--table", table_path, "CSV with columns l, p_hat")->required();
  fit_cmd->callback([&] {
    finalize_globals();
    exit_code = guarded([&] { return cmd_fit_sigmoid(g, table_path); });
  });

  auto* isi_cmd = app.add_subcommand("isi", "interspike-interval comparison");
  isi_cmd->fallthrough();
  isi_cmd->callback([&] {
    finalize_globals();
    exit_code = guarded([&] { return cmd_isi(g); });
  });

  auto* psd_cmd = app.add_subcommand("psd", "spectral comparisons");
  psd_cmd->fallthrough();
  psd_cmd->callback([&] {
    finalize_globals();
    exit_code = guarded([&] { return cmd_psd(g); });
  });

  auto* verify_cmd = app.add_subcommand("verify", "attractor property suite");
  verify_cmd->fallthrough();
  verify_cmd->callback([&] {
    finalize_globals();
    exit_code = guarded([&] { return cmd_verify(g); });
  });

  auto* fit_table_cmd = app.add_subcommand("fit-table", "regenerate the sigmoid-fit table");
  fit_table_cmd->fallthrough();
  fit_table_cmd->callback([&] {
    finalize_globals();
    exit_code = guarded([&] { return cmd_fit_table(g); });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) {
      json j;
      j["error"] = {{"type", "usage"}, {"message", e.what()}};
      std::cout << j.dump(2) << "\n";
    }
    return app.exit(e);
  }
  return exit_code;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.push_back("fhn");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(storage.size());
  for (const auto& s : storage) argv.push_back(s.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace fhn
