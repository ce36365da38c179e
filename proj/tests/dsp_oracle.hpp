#pragma once

// Brute-force DSP oracle, written directly from the definitions and kept
// independent of the library implementation: O(N^2) DFT, direct triangular
// mel filter evaluation, all in double precision.

#include <cmath>
#include <complex>
#include <vector>

namespace dsp_oracle {

// O(N^2) DFT magnitude spectrum of a Hamming-windowed 400-sample frame,
// zero-padded to 512 points.
inline std::vector<double> dft_magnitude(const std::vector<double>& frame) {
  const int n_fft = 512;
  std::vector<double> windowed(n_fft, 0.0);
  for (int n = 0; n < 400; ++n)
    windowed[n] = frame[n] * (0.54 - 0.46 * std::cos(2.0 * M_PI * n / 399.0));
  std::vector<double> mag(n_fft / 2 + 1);
  for (int k = 0; k <= n_fft / 2; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (int n = 0; n < n_fft; ++n) {
      double ang = -2.0 * M_PI * k * n / n_fft;
      acc += windowed[n] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    mag[k] = std::abs(acc);
  }
  return mag;
}

inline double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
inline double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// 42 mel-equally-spaced edge frequencies between 0 and 8000 Hz; filter j has
// edges (j, j+1, j+2) with its center at edge j+1.
inline std::vector<double> mel_edges() {
  std::vector<double> edges(42);
  double mel_max = hz_to_mel(8000.0);
  for (int i = 0; i < 42; ++i) edges[i] = mel_to_hz(mel_max * i / 41.0);
  return edges;
}

inline std::vector<double> log_mel(const std::vector<double>& frame) {
  auto mag = dft_magnitude(frame);
  auto edges = mel_edges();
  std::vector<double> out(40);
  for (int j = 0; j < 40; ++j) {
    double left = edges[j], center = edges[j + 1], right = edges[j + 2];
    double e = 0.0;
    for (int k = 0; k <= 256; ++k) {
      double f = k * 16000.0 / 512.0;
      double w = 0.0;
      if (f > left && f <= center)
        w = (f - left) / (center - left);
      else if (f > center && f < right)
        w = (right - f) / (right - center);
      e += w * mag[k];
    }
    out[j] = std::log(std::max(e, 1e-10));
  }
  return out;
}

}  // namespace dsp_oracle
