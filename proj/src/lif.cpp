#include "fhn/lif.hpp"

#include <cmath>
#include <stdexcept>

namespace fhn {

Vec2 transform_state(const NormalForm& nf, const Vec2& x) noexcept { return nf.Q_inv * x; }

Vec2 transform_state_inverse(const NormalForm& nf, const Vec2& y) noexcept { return nf.Q * y; }

double sigma_eff(const FhnParams& params) {
  const NormalForm nf = normal_form(params);
  // C = Q^-1 diag(0, sigma0) has h_e as its only nonzero column, so
  // tr(C C^T) = |h_e|^2.
  return std::sqrt(norm_sq(nf.h_e) / 2.0);
}

double LifModel::drift(double r, double t) const {
  if (r <= 0.0) throw std::domain_error("LifModel::drift: singular at R <= 0");
  switch (kind) {
    case LifKind::radial_ou:
      return sigma_eff * sigma_eff / (2.0 * r) - mu * r;
    case LifKind::polar_radial: {
      const double d = diffusion(t);
      return (norm_sq(h_e) - d * d) / (2.0 * r) - mu * r;
    }
  }
  return 0.0;
}

double LifModel::diffusion(double t) const noexcept {
  switch (kind) {
    case LifKind::radial_ou:
      return sigma_eff;
    case LifKind::polar_radial: {
      const double angle = nu * t + theta_phase;
      return h_e[0] * std::sin(angle) + h_e[1] * std::cos(angle);
    }
  }
  return 0.0;
}

double LifModel::drift_root() const noexcept { return sigma_eff / std::sqrt(2.0 * mu); }

SdeSystem LifModel::make_sde(double h) const {
  if (!(h > 0.0)) throw std::invalid_argument("LifModel::make_sde: h must be positive");
  SdeSystem system;
  system.dim = 1;
  system.interpretation = NoiseInterpretation::ito;
  const double floor = 0.5 * sigma_eff * std::sqrt(h);
  system.drift = [model = *this, floor](const State& x, double t) -> State {
    const double r = std::max(x[0], floor);
    return {model.drift(r, t), 0.0};
  };
  system.diffusion = [model = *this](const State&, double t) -> State {
    return {model.diffusion(t), 0.0};
  };
  system.constraint = [](State& x) {
    if (x[0] < 0.0) {
      x[0] = -x[0];
      return true;
    }
    return false;
  };
  return system;
}

namespace {

LifModel base_model(const FhnParams& params) {
  const NormalForm nf = normal_form(params);
  LifModel model;
  model.mu = nf.mu;
  model.nu = nf.nu;
  model.h_e = nf.h_e;
  model.sigma_eff = std::sqrt(norm_sq(nf.h_e) / 2.0);
  model.sigma0 = params.noise.sigma0;
  return model;
}

}  // namespace

LifModel radial_ou_model(const FhnParams& params) {
  LifModel model = base_model(params);
  model.kind = LifKind::radial_ou;
  return model;
}

LifModel polar_radial_model(const FhnParams& params) {
  LifModel model = base_model(params);
  model.kind = LifKind::polar_radial;
  return model;
}

AveragedTrajectory averaged_process(const FhnParams& params, const BrownianPath& b1,
                                    const BrownianPath& b2, const Vec2& y0) {
  if (b1.steps() != b2.steps() || b1.dt != b2.dt) {
    throw std::invalid_argument("averaged_process: component paths must share the grid");
  }
  const NormalForm nf = normal_form(params);
  const double sigma = std::sqrt(norm_sq(nf.h_e) / 2.0);
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("averaged_process: requires positive noise amplitude");
  }

  AveragedTrajectory out;
  out.sigma = sigma;
  out.mu = nf.mu;
  out.nu = nf.nu;

  const double ds = b1.dt;              // slow-time step
  const double h_fast = ds / nf.mu;     // original-time spacing of samples
  const double amp = sigma / std::sqrt(nf.mu);

  Vec2 s = {y0[0] / amp, y0[1] / amp};  // S_0 = (sqrt(mu)/sigma) Y_0
  out.t.reserve(b1.steps() + 1);
  out.s_bar.reserve(b1.steps() + 1);
  out.y_app.reserve(b1.steps() + 1);

  for (std::size_t i = 0; i <= b1.steps(); ++i) {
    const double t = h_fast * static_cast<double>(i);
    out.t.push_back(t);
    out.s_bar.push_back(s);
    const double c = std::cos(nf.nu * t);
    const double sn = std::sin(nf.nu * t);
    // Rot(-nu t) applied to S, then rescaled.
    out.y_app.push_back({amp * (c * s[0] + sn * s[1]), amp * (-sn * s[0] + c * s[1])});
    if (i < b1.steps()) {
      // Heun step of dS = -S ds + dB componentwise (additive noise).
      for (int k = 0; k < 2; ++k) {
        const double dB = (k == 0 ? b1 : b2).increments[i];
        const double predictor = s[k] - s[k] * ds + dB;
        s[k] += 0.5 * (-s[k] - predictor) * ds + dB;
      }
    }
  }
  return out;
}

}  // namespace fhn
