#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fhn/rng.hpp"

namespace fhn {

/// A discretized scalar Brownian path: `increments[i]` is B(t0+(i+1)dt) -
/// B(t0+i*dt), each N(0, dt). Paths remember the (seed, stream_id) they were
/// drawn from so derived paths stay attributable; the increments themselves
/// are authoritative (shifted or coarsened paths keep the original ids).
struct BrownianPath {
  double t0 = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::vector<double> increments;

  [[nodiscard]] std::size_t steps() const noexcept { return increments.size(); }
  [[nodiscard]] double time_at(std::size_t i) const noexcept { return t0 + dt * static_cast<double>(i); }
  [[nodiscard]] double t_end() const noexcept { return time_at(steps()); }
};

/// Draws a fresh Brownian path. Deterministic in all arguments; distinct
/// stream ids give statistically independent paths under the same seed.
[[nodiscard]] inline BrownianPath brownian_path(std::uint64_t seed, std::uint64_t stream_id,
                                                double dt, std::size_t n_steps,
                                                double t0 = 0.0) {
  if (!(dt > 0.0)) throw std::invalid_argument("brownian_path: dt must be positive");
  BrownianPath path;
  path.t0 = t0;
  path.dt = dt;
  path.seed = seed;
  path.stream_id = stream_id;
  path.increments.resize(n_steps);
  CounterRng rng(seed, stream_id);
  const double scale = std::sqrt(dt);
  for (std::size_t i = 0; i < n_steps; ++i) {
    path.increments[i] = scale * rng.gaussian(i);
  }
  return path;
}

/// Sums adjacent increments in groups of `factor`, producing the same
/// Brownian motion sampled at step factor*dt. Used by step-refinement
/// convergence tests so coarse and fine runs share one path.
[[nodiscard]] inline BrownianPath coarsen(const BrownianPath& path, std::size_t factor) {
  if (factor == 0) throw std::invalid_argument("coarsen: factor must be >= 1");
  if (path.steps() % factor != 0) {
    throw std::invalid_argument("coarsen: step count not divisible by factor");
  }
  BrownianPath out;
  out.t0 = path.t0;
  out.dt = path.dt * static_cast<double>(factor);
  out.seed = path.seed;
  out.stream_id = path.stream_id;
  out.increments.resize(path.steps() / factor);
  for (std::size_t i = 0; i < out.increments.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < factor; ++j) sum += path.increments[i * factor + j];
    out.increments[i] = sum;
  }
  return out;
}

}  // namespace fhn
