#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fhn/brownian.hpp"
#include "fhn/errors.hpp"
#include "fhn/model.hpp"
#include "fhn/rng.hpp"
#include "fhn/sde.hpp"

using namespace fhn;

namespace {

// Reference equilibrium of the default parameter set, used across suites.
constexpr double kVRef = -1.00125;
constexpr double kWRef = -0.401665;

Vec2 random_box_point(const CounterRng& rng, std::uint64_t i, double half_width) {
  return {half_width * (2.0 * rng.uniform(2 * i) - 1.0),
          half_width * (2.0 * rng.uniform(2 * i + 1) - 1.0)};
}

}  // namespace

TEST_CASE("drift vanishes at the reference equilibrium") {
  const FhnParams params;
  const State rate = fhn_drift(params, {kVRef, kWRef});
  CHECK(std::abs(rate[0]) < 1e-5);
  CHECK(std::abs(rate[1]) < 1e-5);
}

TEST_CASE("drift arithmetic on hand-computable states") {
  FhnParams params;
  SUBCASE("origin with zero bias leaves only the recovery pull") {
    params.bias_current = 0.0;
    const State rate = fhn_drift(params, {0.0, 0.0});
    CHECK(rate[0] == 0.0);
    CHECK(rate[1] == params.epsilon * params.alpha);
  }
  SUBCASE("unit voltage state") {
    // Direct arithmetic oracle: f = 1 - 1/3 + I, g = eps*(1 + alpha).
    const State rate = fhn_drift(params, {1.0, 0.0});
    CHECK(rate[0] == doctest::Approx(1.0 - 1.0 / 3.0 + params.bias_current).epsilon(1e-15));
    CHECK(rate[1] == doctest::Approx(params.epsilon * (1.0 + params.alpha)).epsilon(1e-15));
  }
}

TEST_CASE("fast nullcline passes through hand-computable points") {
  const FhnParams params;
  CHECK(critical_manifold(params, 0.0) == doctest::Approx(params.bias_current).epsilon(1e-15));
  const FixedPoint fp = fixed_point(params);
  // The rest state sits on the nullcline.
  CHECK(std::abs(critical_manifold(params, fp.v_e) - fp.w_e) < 1e-5);
}

TEST_CASE("nullcline branch stability follows the fast drift derivative") {
  CHECK(critical_manifold_stable(-2.0));
  CHECK_FALSE(critical_manifold_stable(0.0));
  CHECK(critical_manifold_stable(2.0));
}

TEST_CASE("rest state matches the reference values") {
  const FixedPoint fp = fixed_point(FhnParams{});
  CHECK(std::abs(fp.v_e - kVRef) < 1e-5);
  CHECK(std::abs(fp.w_e - kWRef) < 1e-5);
  CHECK(std::abs(fp.mu - 0.0312496) < 1e-4);
  CHECK(std::abs(fp.nu - 0.281378) < 1e-4);
  CHECK(fp.complex_pair);
  CHECK(fp.residual < 1e-10);
}

TEST_CASE("eigenvalue split reproduces trace and determinant") {
  const FixedPoint fp = fixed_point(FhnParams{});
  CHECK(std::abs(fp.jacobian.trace() - (-2.0 * fp.mu)) < 1e-12);
  CHECK(std::abs(fp.jacobian.det() - (fp.mu * fp.mu + fp.nu * fp.nu)) < 1e-12);
}

TEST_CASE("rest-state residual stays tiny across valid parameter draws") {
  CounterRng rng(555, 1);
  std::size_t tested = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    FhnParams params;
    params.bias_current = 0.5 * rng.uniform(4 * i);
    params.alpha = 0.4 + 0.6 * rng.uniform(4 * i + 1);
    params.beta = 0.5 + 0.4 * rng.uniform(4 * i + 2);
    params.epsilon = 0.02 + 0.2 * rng.uniform(4 * i + 3);
    try {
      const FixedPoint fp = fixed_point(params);
      CHECK(fp.residual < 1e-10);
      ++tested;
    } catch (const NotUniqueFixedPointError&) {
      // Multi-root draws are legitimately rejected.
    }
  }
  CHECK(tested > 100);
}

TEST_CASE("degenerate triple root still refines to the origin") {
  FhnParams params;
  params.bias_current = 0.0;
  params.alpha = 0.0;
  params.beta = 1.0;
  const FixedPoint fp = fixed_point(params);
  CHECK(std::abs(fp.v_e) < 1e-8);
  CHECK(std::abs(fp.w_e) < 1e-8);
  CHECK(fp.p == 0.0);
  CHECK(fp.q == 0.0);
}

TEST_CASE("multi-root parameters are rejected") {
  FhnParams params;
  params.beta = 3.0;
  params.alpha = 0.0;
  params.bias_current = 0.0;
  CHECK_THROWS_AS((void)fixed_point(params), NotUniqueFixedPointError);
}

TEST_CASE("excitable-regime report on the default parameters") {
  const ExcitableReport report = validate_excitable(FhnParams{});
  CHECK(report.pass);
  CHECK(report.unique_fixed_point);
  CHECK(report.stable_focus);
  CHECK(report.averaging_valid);
  CHECK(std::abs(report.ratio - 0.111059) < 1e-4);
}

TEST_CASE("excitable-regime report recomputes eigenvalues for other params") {
  // Oracle: mu = -(1 - v_e^2 - eps*beta)/2 and
  // nu = sqrt(4 eps - (1 - v_e^2 + eps beta)^2)/2, evaluated directly.
  FhnParams params;
  params.epsilon = 0.5;
  const FixedPoint fp = fixed_point(params);
  const double m11 = 1.0 - fp.v_e * fp.v_e;
  const double eb = params.epsilon * params.beta;
  const double mu_oracle = -0.5 * (m11 - eb);
  const double inner = 4.0 * params.epsilon - (m11 + eb) * (m11 + eb);
  const ExcitableReport report = validate_excitable(params);
  CHECK(report.mu == doctest::Approx(mu_oracle).epsilon(1e-10));
  REQUIRE(inner > 0.0);
  CHECK(report.nu == doctest::Approx(0.5 * std::sqrt(inner)).epsilon(1e-10));
}

TEST_CASE("excitable-regime report flags multi-root parameters") {
  FhnParams params;
  params.beta = 3.0;
  params.alpha = 0.0;
  params.bias_current = 0.0;
  const ExcitableReport report = validate_excitable(params);
  CHECK_FALSE(report.pass);
  CHECK_FALSE(report.unique_fixed_point);
  CHECK(report.delta <= 0.0);
}

TEST_CASE("dissipativity constants from the closed form") {
  const FhnParams params;
  const auto [a, b] = dissipativity_constants(params);
  // Direct arithmetic oracle.
  const double eb = params.epsilon * params.beta;
  const double inner = 1.0 + eb / 2.0 +
                       (1.0 - params.epsilon) * (1.0 - params.epsilon) / (2.0 * eb);
  CHECK(a == doctest::Approx(3.0 * inner * inner).epsilon(1e-14));
  CHECK(b == doctest::Approx(eb / 2.0).epsilon(1e-14));
  CHECK(a == doctest::Approx(196.020833333333).epsilon(1e-9));
  CHECK(b == doctest::Approx(0.03).epsilon(1e-14));
}

TEST_CASE("dissipativity constants degenerate case") {
  FhnParams params;
  params.epsilon = 1.0;
  params.beta = 2.0;
  const auto [a, b] = dissipativity_constants(params);
  CHECK(a == doctest::Approx(12.0).epsilon(1e-14));
  CHECK(b == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("one-sided dissipativity inequality holds on sampled pairs") {
  const FhnParams params;
  const auto [a, b] = dissipativity_constants(params);
  CounterRng rng(777, 2);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const Vec2 x1 = random_box_point(rng, 2 * i, 5.0);
    const Vec2 x2 = random_box_point(rng, 2 * i + 1, 5.0);
    const Vec2 diff = x1 - x2;
    const Vec2 df = fhn_drift(params, x1) - fhn_drift(params, x2);
    CHECK(dot(diff, df) <= a - b * norm_sq(diff) + 1e-12);
  }
}

TEST_CASE("noise field shapes") {
  NoiseSpec add{NoiseKind::additive, 0.01};
  const State ha = noise_field(add, {3.7, -42.0});
  CHECK(ha[0] == 0.0);
  CHECK(ha[1] == 0.01);

  NoiseSpec mult{NoiseKind::multiplicative, 0.01};
  const State hm = noise_field(mult, {1.0, -0.4});
  CHECK(hm[0] == 0.0);
  CHECK(hm[1] == doctest::Approx(-0.004).epsilon(1e-15));
}

TEST_CASE("noise field is globally Lipschitz with constant sigma0") {
  CounterRng rng(888, 3);
  for (NoiseKind kind : {NoiseKind::additive, NoiseKind::multiplicative}) {
    NoiseSpec spec{kind, 0.01};
    for (std::uint64_t i = 0; i < 300; ++i) {
      const Vec2 x1 = random_box_point(rng, 2 * i, 10.0);
      const Vec2 x2 = random_box_point(rng, 2 * i + 1, 10.0);
      const double lhs = norm(noise_field(spec, x1) - noise_field(spec, x2));
      CHECK(lhs <= spec.sigma0 * norm(x1 - x2) + 1e-15);
    }
  }
}

TEST_CASE("zero noise amplitude reduces to the deterministic flow bit for bit") {
  FhnParams params;
  params.noise.sigma0 = 0.0;
  const SdeSystem sys = fhn_system(params);
  const State x0{-0.5, 0.1};
  const BrownianPath noisy = brownian_path(9, 9, 0.01, 5000);
  BrownianPath silent = noisy;
  for (double& dw : silent.increments) dw = 0.0;
  const Trajectory a = integrate(sys, x0, noisy);
  const Trajectory b = integrate(sys, x0, silent);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    CHECK(a.states[i][0] == b.states[i][0]);
    CHECK(a.states[i][1] == b.states[i][1]);
  }
}

TEST_CASE("parameter validation rejects out-of-domain values") {
  FhnParams bad_eps;
  bad_eps.epsilon = 1.0;
  CHECK_THROWS_AS(validate_params(bad_eps), std::invalid_argument);
  FhnParams bad_beta;
  bad_beta.beta = 0.0;
  CHECK_THROWS_AS(validate_params(bad_beta), std::invalid_argument);
  FhnParams bad_sigma;
  bad_sigma.noise.sigma0 = -0.1;
  CHECK_THROWS_AS(validate_params(bad_sigma), std::invalid_argument);
  CHECK_NOTHROW(validate_params(FhnParams{}));
}
