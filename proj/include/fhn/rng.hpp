#pragma once

#include <cmath>
#include <cstdint>

namespace fhn {

// Counter-based random number generation.
//
// Every stochastic routine in this library draws randomness through a
// (seed, stream_id, counter) triple instead of a shared mutable generator.
// The value at a counter is a pure function of the triple, which gives:
//
//   * bit-for-bit reproducibility of any trial in isolation,
//   * O(1) random access to any position of a stream (useful for resuming
//     long integrations in chunks without storing increments), and
//   * embarrassingly parallel ensembles with no generator state to share.
//
// Construction: the 64-bit avalanching finalizer of SplitMix64 is applied to
// a per-stream key plus counter * golden-ratio increment, i.e. the stream is
// exactly a SplitMix64 sequence whose initial state is derived by double
// mixing of (seed, stream_id). SplitMix64 passes BigCrush and adjacent keys
// are decorrelated by the finalizer, which is more than adequate for the
// Monte Carlo sample sizes used here.

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

/// SplitMix64 finalizer: invertible 64-bit avalanche function.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

/// Derives the SplitMix64 starting state for stream `stream_id` of `seed`.
/// Seed and stream enter through different constants so the pair is not
/// interchangeable.
[[nodiscard]] constexpr std::uint64_t stream_key(std::uint64_t seed,
                                                 std::uint64_t stream_id) noexcept {
  return mix64(mix64(seed + kGoldenGamma) ^ mix64(stream_id ^ 0xD1B54A32D192ED03ull));
}

/// Stateless generator for one stream: uniform and Gaussian variates indexed
/// by counter.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : key_(stream_key(seed, stream_id)) {}

  /// Raw 64-bit word at position `counter` of the stream.
  [[nodiscard]] std::uint64_t word(std::uint64_t counter) const noexcept {
    return mix64(key_ + (counter + 1) * kGoldenGamma);
  }

  /// Uniform double in (0, 1]; never returns 0 so log() is safe.
  [[nodiscard]] double uniform_pos(std::uint64_t counter) const noexcept {
    return static_cast<double>((word(counter) >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform double in [0, 1).
  [[nodiscard]] double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(word(counter) >> 11) * 0x1.0p-53;
  }

  /// Standard Gaussian at position `index`, via Box-Muller on the uniforms at
  /// counters 2*index and 2*index+1.
  [[nodiscard]] double gaussian(std::uint64_t index) const noexcept {
    const double u1 = uniform_pos(2 * index);
    const double u2 = uniform(2 * index + 1);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

 private:
  std::uint64_t key_;
};

/// Sequential view over one stream's Gaussian variates; `next()` is the
/// variate at the running index. Purely a convenience for streaming loops;
/// the values are identical to CounterRng::gaussian(0), gaussian(1), ...
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : rng_(seed, stream_id) {}

  double next() noexcept { return rng_.gaussian(index_++); }

  [[nodiscard]] std::uint64_t position() const noexcept { return index_; }

 private:
  CounterRng rng_;
  std::uint64_t index_ = 0;
};

// Stream-id allocation. Each estimation routine owns a purpose block of
// 2^32 stream ids so that independent experiments never reuse a stream under
// the same seed. Within a block, ids are laid out as point*2^20 + trial,
// which caps grid points at 4096 and trials per point at 2^20.
enum class StreamPurpose : std::uint64_t {
  generic = 0,
  firing = 1,
  isi_empirical = 2,
  isi_density = 3,
  linearization = 4,
  pullback = 5,
  stationary = 6,
  spectral = 7,
  engine_test = 8,
  lif = 9,
};

[[nodiscard]] constexpr std::uint64_t stream_for(StreamPurpose purpose,
                                                 std::uint64_t point,
                                                 std::uint64_t trial = 0) noexcept {
  return (static_cast<std::uint64_t>(purpose) << 32) + (point << 20) + trial;
}

}  // namespace fhn
