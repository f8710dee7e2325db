#include "fhn/sde.hpp"

#include <cmath>

namespace fhn {

namespace {

/// Linear interpolation of the crossing of `value` between two grid states.
Event interpolate_crossing(EventKind kind, double t_prev, double h, const State& x_prev,
                           const State& x_next, double v_prev, double v_next) {
  const double denom = v_next - v_prev;
  const double theta = denom != 0.0 ? (0.0 - v_prev) / denom : 0.0;
  Event ev;
  ev.kind = kind;
  ev.time = t_prev + theta * h;
  ev.state = {x_prev[0] + theta * (x_next[0] - x_prev[0]),
              x_prev[1] + theta * (x_next[1] - x_prev[1])};
  return ev;
}

}  // namespace

Trajectory integrate(const SdeSystem& system, const State& x0, const BrownianPath& path,
                     std::span<const EventDetector> detectors) {
  if (detail::state_out_of_bounds(x0)) throw std::invalid_argument("integrate: x0 not finite");

  Trajectory traj;
  traj.t0 = path.t0;
  traj.dt = path.dt;
  traj.states.reserve(path.steps() + 1);
  traj.states.push_back(x0);

  std::vector<double> prev_value(detectors.size());
  for (std::size_t d = 0; d < detectors.size(); ++d) prev_value[d] = detectors[d].value(x0);

  State x = x0;
  for (std::size_t i = 0; i < path.steps(); ++i) {
    const double t = path.time_at(i);
    State next = detail::sde_step(system, x, t, path.dt, path.increments[i]);
    if (system.constraint && system.constraint(next)) ++traj.constraint_hits;
    if (detail::state_out_of_bounds(next)) throw BlowUpError(i, t);

    traj.states.push_back(next);

    bool stop = false;
    for (std::size_t d = 0; d < detectors.size(); ++d) {
      const double value = detectors[d].value(next);
      if (prev_value[d] < 0.0 && value >= 0.0) {
        traj.events.push_back(
            interpolate_crossing(detectors[d].kind, t, path.dt, x, next, prev_value[d], value));
        if (detectors[d].terminal) stop = true;
      }
      prev_value[d] = value;
    }
    x = next;
    if (stop) {
      traj.terminated_early = true;
      break;
    }
  }
  return traj;
}

std::optional<Event> first_passage(const SdeSystem& system, const State& x0,
                                   const BrownianPath& path,
                                   const std::function<double(const State&)>& predicate,
                                   EventKind kind) {
  if (detail::state_out_of_bounds(x0)) {
    throw std::invalid_argument("first_passage: x0 not finite");
  }
  State x = x0;
  double v_prev = predicate(x0);
  for (std::size_t i = 0; i < path.steps(); ++i) {
    const double t = path.time_at(i);
    State next = detail::sde_step(system, x, t, path.dt, path.increments[i]);
    if (system.constraint) system.constraint(next);
    if (detail::state_out_of_bounds(next)) throw BlowUpError(i, t);
    const double value = predicate(next);
    if (v_prev < 0.0 && value >= 0.0) {
      return interpolate_crossing(kind, t, path.dt, x, next, v_prev, value);
    }
    v_prev = value;
    x = next;
  }
  return std::nullopt;
}

std::optional<Event> first_passage_stream(const SdeSystem& system, const State& x0, double t0,
                                          double h, std::size_t max_steps, GaussianStream& gauss,
                                          const std::function<double(const State&)>& predicate,
                                          EventKind kind) {
  if (detail::state_out_of_bounds(x0)) {
    throw std::invalid_argument("first_passage_stream: x0 not finite");
  }
  const double noise_scale = std::sqrt(h);
  State x = x0;
  double v_prev = predicate(x0);
  for (std::size_t i = 0; i < max_steps; ++i) {
    const double t = t0 + h * static_cast<double>(i);
    const double dW = noise_scale * gauss.next();
    State next = detail::sde_step(system, x, t, h, dW);
    if (system.constraint) system.constraint(next);
    if (detail::state_out_of_bounds(next)) throw BlowUpError(i, t);
    const double value = predicate(next);
    if (v_prev < 0.0 && value >= 0.0) {
      return interpolate_crossing(kind, t, h, x, next, v_prev, value);
    }
    v_prev = value;
    x = next;
  }
  return std::nullopt;
}

}  // namespace fhn
