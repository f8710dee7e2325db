#pragma once

#include <complex>
#include <span>
#include <vector>

namespace fhn {

/// One-sided power spectral density estimate.
struct Psd {
  std::vector<double> freqs;  // strictly increasing, cycles per time unit
  std::vector<double> power;  // nonnegative
  double scale = 1.0;         // normalization factor applied so far
};

/// In-place radix-2 decimation-in-time FFT; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& data);

/// Largest power of two not exceeding n (n >= 1).
[[nodiscard]] std::size_t floor_pow2(std::size_t n) noexcept;

/// Welch-averaged one-sided periodogram with a periodic Hann window.
/// `segment_len` is rounded down to a power of two for the radix-2
/// transform; segments advance by segment_len*(1-overlap) samples and each
/// segment has its mean removed. Normalization is density-style: the sum of
/// bins times the bin width approximates the series variance.
[[nodiscard]] Psd estimate_psd(std::span<const double> series, double dt,
                               std::size_t segment_len, double overlap = 0.5);

/// Segment length giving about `n_segments` windows at 50% overlap,
/// rounded down to a power of two (never below 16).
[[nodiscard]] std::size_t default_segment_len(std::size_t series_len,
                                              std::size_t n_segments = 8);

/// Rescales so the peak equals `target`; the factor accumulates in `scale`.
[[nodiscard]] Psd scale_to_max(const Psd& psd, double target);

/// Normalized inner product (cosine similarity) of two spectra on one grid;
/// 1 for proportional spectra, 0 for disjoint support.
[[nodiscard]] double spectral_overlap(const Psd& a, const Psd& b);

/// Pointwise mean of an ensemble of spectra sharing one grid.
[[nodiscard]] Psd average_psd(std::span<const Psd> ensemble);

}  // namespace fhn
