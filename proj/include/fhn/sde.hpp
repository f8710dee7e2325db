#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fhn/brownian.hpp"
#include "fhn/errors.hpp"
#include "fhn/mat2.hpp"
#include "fhn/rng.hpp"

namespace fhn {

/// State vector; 1-D systems use component 0 and leave component 1 at zero.
using State = Vec2;

enum class NoiseInterpretation { stratonovich, ito };

/// An SDE dX = f(X,t)dt + g(X,t) dB driven by one scalar Brownian motion.
/// Stratonovich systems are integrated with the stochastic Heun
/// predictor-corrector; Ito systems with Euler-Maruyama.
struct SdeSystem {
  int dim = 2;
  NoiseInterpretation interpretation = NoiseInterpretation::stratonovich;
  std::function<State(const State&, double)> drift;
  std::function<State(const State&, double)> diffusion;
  /// Optional post-step projection (e.g. radial reflection). Returns true
  /// when it had to modify the state; the integrator counts those hits.
  std::function<bool(State&)> constraint;
};

enum class EventKind { spike, line_crossing, stop };

struct Event {
  EventKind kind = EventKind::stop;
  double time = 0.0;
  State state{};
};

/// Declarative upward-zero-crossing detector: an event fires whenever the
/// scalar `value` functional moves from negative to non-negative between two
/// consecutive grid states. Crossing times are linearly interpolated.
struct EventDetector {
  EventKind kind = EventKind::line_crossing;
  std::function<double(const State&)> value;
  bool terminal = false;
};

struct Trajectory {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<State> states;  // states[i] is the state at t0 + i*dt
  std::vector<Event> events;
  std::size_t constraint_hits = 0;
  bool terminated_early = false;

  [[nodiscard]] double time_at(std::size_t i) const noexcept {
    return t0 + dt * static_cast<double>(i);
  }
  [[nodiscard]] std::size_t steps() const noexcept {
    return states.empty() ? 0 : states.size() - 1;
  }
};

namespace detail {

/// One fixed-size integration step of `system` from state `x` at time `t`
/// with step `h` and Brownian increment `dW`. Exposed so estimation loops
/// that cannot afford to materialize full paths can stream their own steps.
[[nodiscard]] inline State sde_step(const SdeSystem& system, const State& x, double t,
                                    double h, double dW) {
  if (system.interpretation == NoiseInterpretation::ito) {
    const State f = system.drift(x, t);
    const State g = system.diffusion(x, t);
    return {x[0] + f[0] * h + g[0] * dW, x[1] + f[1] * h + g[1] * dW};
  }
  // Stratonovich Heun: Euler predictor, trapezoidal corrector on both fields.
  const State f0 = system.drift(x, t);
  const State g0 = system.diffusion(x, t);
  const State xp = {x[0] + f0[0] * h + g0[0] * dW, x[1] + f0[1] * h + g0[1] * dW};
  const State f1 = system.drift(xp, t + h);
  const State g1 = system.diffusion(xp, t + h);
  return {x[0] + 0.5 * (f0[0] + f1[0]) * h + 0.5 * (g0[0] + g1[0]) * dW,
          x[1] + 0.5 * (f0[1] + f1[1]) * h + 0.5 * (g0[1] + g1[1]) * dW};
}

inline constexpr double kBlowUpNorm = 1e6;

[[nodiscard]] inline bool state_out_of_bounds(const State& x) noexcept {
  return !(std::isfinite(x[0]) && std::isfinite(x[1])) ||
         std::abs(x[0]) > kBlowUpNorm || std::abs(x[1]) > kBlowUpNorm;
}

}  // namespace detail

/// Integrates `system` from `x0` across the whole path, recording every grid
/// state. Detector events are reported with linearly interpolated crossing
/// times; a terminal detector stops integration at the end of the step in
/// which it fired. Throws BlowUpError when a state leaves the finite guard
/// region.
[[nodiscard]] Trajectory integrate(const SdeSystem& system, const State& x0,
                                   const BrownianPath& path,
                                   std::span<const EventDetector> detectors = {});

/// First time `predicate(state)` crosses zero from below, linearly
/// interpolated, or nullopt when no crossing happens within the path.
/// Does not store the trajectory, so arbitrarily long paths are cheap.
[[nodiscard]] std::optional<Event> first_passage(
    const SdeSystem& system, const State& x0, const BrownianPath& path,
    const std::function<double(const State&)>& predicate,
    EventKind kind = EventKind::stop);

/// Streaming variant of first_passage: increments are generated on the fly
/// from `gauss` (sqrt(h)-scaled), so horizons of 10^7 steps need no storage.
[[nodiscard]] std::optional<Event> first_passage_stream(
    const SdeSystem& system, const State& x0, double t0, double h, std::size_t max_steps,
    GaussianStream& gauss, const std::function<double(const State&)>& predicate,
    EventKind kind = EventKind::stop);

}  // namespace fhn
