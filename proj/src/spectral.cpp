#include "fhn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fhn {

void fft_radix2(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("FFT size must be a power of two");
  }
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::size_t floor_pow2(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p * 2 <= n) p *= 2;
  return p;
}

std::size_t default_segment_len(std::size_t series_len, std::size_t n_segments) {
  if (n_segments == 0) n_segments = 1;
  // At 50% overlap, k segments of length L span (k+1)*L/2 samples.
  const std::size_t raw = 2 * series_len / (n_segments + 1);
  return std::max<std::size_t>(16, floor_pow2(std::max<std::size_t>(raw, 16)));
}

Psd estimate_psd(std::span<const double> series, double dt, std::size_t segment_len,
                 double overlap) {
  if (dt <= 0.0) throw std::invalid_argument("sample spacing must be positive");
  if (segment_len < 16) throw std::invalid_argument("segment length must be at least 16");
  if (!(overlap >= 0.0 && overlap <= 0.9)) {
    throw std::invalid_argument("overlap must lie in [0, 0.9]");
  }
  const std::size_t L = floor_pow2(segment_len);
  if (series.size() < L) throw std::invalid_argument("series shorter than one segment");

  const std::size_t step =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   std::llround(static_cast<double>(L) * (1.0 - overlap))));

  // Periodic Hann window and its power, for density normalization.
  std::vector<double> window(L);
  double win_power = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    window[i] =
        0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                              static_cast<double>(L)));
    win_power += window[i] * window[i];
  }

  const std::size_t n_bins = L / 2 + 1;
  Psd psd;
  psd.freqs.resize(n_bins);
  psd.power.assign(n_bins, 0.0);
  for (std::size_t k = 0; k < n_bins; ++k) {
    psd.freqs[k] = static_cast<double>(k) / (static_cast<double>(L) * dt);
  }

  std::vector<std::complex<double>> buf(L);
  std::size_t n_segments = 0;
  for (std::size_t start = 0; start + L <= series.size(); start += step) {
    double mean = 0.0;
    for (std::size_t i = 0; i < L; ++i) mean += series[start + i];
    mean /= static_cast<double>(L);
    for (std::size_t i = 0; i < L; ++i) {
      buf[i] = {(series[start + i] - mean) * window[i], 0.0};
    }
    fft_radix2(buf);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double mag2 = std::norm(buf[k]);
      const double one_sided = (k == 0 || k == L / 2) ? 1.0 : 2.0;
      psd.power[k] += one_sided * mag2 * dt / win_power;
    }
    ++n_segments;
  }
  for (double& p : psd.power) p /= static_cast<double>(n_segments);
  return psd;
}

Psd scale_to_max(const Psd& psd, double target) {
  const auto it = std::max_element(psd.power.begin(), psd.power.end());
  if (it == psd.power.end() || !(*it > 0.0)) {
    throw std::invalid_argument("cannot rescale an all-zero spectrum");
  }
  const double factor = target / *it;
  Psd out = psd;
  for (double& p : out.power) p *= factor;
  out.scale = psd.scale * factor;
  return out;
}

namespace {

void require_same_grid(const Psd& a, const Psd& b) {
  if (a.freqs.size() != b.freqs.size()) {
    throw std::invalid_argument("spectra have different frequency grids");
  }
  for (std::size_t k = 0; k < a.freqs.size(); ++k) {
    if (std::abs(a.freqs[k] - b.freqs[k]) > 1e-12 * std::max(1.0, std::abs(a.freqs[k]))) {
      throw std::invalid_argument("spectra have different frequency grids");
    }
  }
}

}  // namespace

double spectral_overlap(const Psd& a, const Psd& b) {
  require_same_grid(a, b);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.power.size(); ++k) {
    dot += a.power[k] * b.power[k];
    na += a.power[k] * a.power[k];
    nb += b.power[k] * b.power[k];
  }
  if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

Psd average_psd(std::span<const Psd> ensemble) {
  if (ensemble.empty()) throw std::invalid_argument("empty spectrum ensemble");
  Psd out = ensemble.front();
  for (std::size_t m = 1; m < ensemble.size(); ++m) {
    require_same_grid(out, ensemble[m]);
    for (std::size_t k = 0; k < out.power.size(); ++k) out.power[k] += ensemble[m].power[k];
  }
  for (double& p : out.power) p /= static_cast<double>(ensemble.size());
  return out;
}

}  // namespace fhn
