#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "emodep/dsp/wav.hpp"
#include "emodep/errors.hpp"

namespace emodep::dsp {

inline constexpr int kFrameLength = 400;  // 25 ms at 16 kHz
inline constexpr int kFrameShift = 160;   // 10 ms
inline constexpr int kNumMelBins = 40;
inline constexpr int kFftSize = 512;      // next power of two >= 400
inline constexpr int kFeatureDim = 80;    // 40 static + 40 delta
inline constexpr double kLogFloor = 1e-10;

struct FrontendConfig {
  bool pre_emphasis = false;     // off unless enabled
  double pre_emphasis_coeff = 0.97;
  bool mean_normalize = false;   // per-utterance mean subtraction, off by default
};

// T x D row-major feature sequence with framing metadata.
struct FeatureMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<float> values;  // row-major
  int frame_shift_ms = 10;
  int frame_length_ms = 25;

  float& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  float at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
  const float* row(int r) const { return values.data() + static_cast<std::size_t>(r) * cols; }
};

// floor((n - 400) / 160) + 1; zero when the clip is shorter than one frame.
inline int frame_count(std::size_t num_samples) {
  if (num_samples < static_cast<std::size_t>(kFrameLength)) return 0;
  return static_cast<int>((num_samples - kFrameLength) / kFrameShift) + 1;
}

// Splits a clip into overlapping 400-sample frames, scaled to [-1, 1).
// Frame k covers samples [160k, 160k + 400); a trailing partial frame is dropped.
inline std::vector<std::vector<double>> frame_signal(const AudioClip& clip,
                                                     const FrontendConfig& cfg = {}) {
  if (clip.sample_rate != kSampleRate)
    throw InvalidInput("clip '" + clip.id + "': sample_rate = " +
                       std::to_string(clip.sample_rate) + ", want 16000");
  int t = frame_count(clip.samples.size());
  if (t == 0)
    throw EmptySignal("clip '" + clip.id + "' has " +
                      std::to_string(clip.samples.size()) +
                      " samples, need at least " + std::to_string(kFrameLength));
  std::vector<std::vector<double>> frames(t, std::vector<double>(kFrameLength));
  for (int k = 0; k < t; ++k) {
    const std::int16_t* src = clip.samples.data() + static_cast<std::size_t>(k) * kFrameShift;
    for (int n = 0; n < kFrameLength; ++n)
      frames[k][n] = src[n] / 32768.0;
    if (cfg.pre_emphasis) {
      for (int n = kFrameLength - 1; n > 0; --n)
        frames[k][n] -= cfg.pre_emphasis_coeff * frames[k][n - 1];
      frames[k][0] -= cfg.pre_emphasis_coeff * frames[k][0];
    }
  }
  return frames;
}

namespace detail {

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// 40 triangular filters over FFT bins 0..256, mel-spaced between 0 and 8 kHz,
// with the triangle evaluated in linear frequency.
struct MelFilterBank {
  // weights[j] covers bins [first_bin[j], first_bin[j] + weights[j].size())
  std::array<std::vector<double>, kNumMelBins> weights;
  std::array<int, kNumMelBins> first_bin{};
  std::array<double, kNumMelBins> center_hz{};

  MelFilterBank() {
    const double mel_max = hz_to_mel(kSampleRate / 2.0);
    std::array<double, kNumMelBins + 2> edge_hz{};
    for (int i = 0; i < kNumMelBins + 2; ++i)
      edge_hz[i] = mel_to_hz(mel_max * i / (kNumMelBins + 1));
    const double bin_hz = static_cast<double>(kSampleRate) / kFftSize;
    for (int j = 0; j < kNumMelBins; ++j) {
      double left = edge_hz[j], center = edge_hz[j + 1], right = edge_hz[j + 2];
      center_hz[j] = center;
      int lo = static_cast<int>(std::ceil(left / bin_hz));
      int hi = static_cast<int>(std::floor(right / bin_hz));
      hi = std::min(hi, kFftSize / 2);
      first_bin[j] = lo;
      for (int k = lo; k <= hi; ++k) {
        double f = k * bin_hz;
        double w = 0.0;
        if (f > left && f <= center)
          w = (f - left) / (center - left);
        else if (f > center && f < right)
          w = (right - f) / (right - center);
        weights[j].push_back(w);
      }
    }
  }
};

inline const MelFilterBank& mel_bank() {
  static const MelFilterBank bank;
  return bank;
}

// In-place iterative radix-2 FFT; n must be a power of two.
inline void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * M_PI / static_cast<double>(len);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace detail

// 40 log-mel filterbank energies of one 400-sample frame: Hamming window,
// 512-point DFT magnitude spectrum, triangular mel filters, natural log with
// a 1e-10 floor (an all-zero frame yields log(1e-10), not an error).
inline std::vector<double> log_mel_fbank(const std::vector<double>& frame) {
  if (static_cast<int>(frame.size()) != kFrameLength)
    throw ShapeError("log_mel_fbank: frame has " + std::to_string(frame.size()) +
                     " samples, want " + std::to_string(kFrameLength));
  std::vector<std::complex<double>> buf(kFftSize, {0.0, 0.0});
  for (int n = 0; n < kFrameLength; ++n) {
    double w = 0.54 - 0.46 * std::cos(2.0 * M_PI * n / (kFrameLength - 1));
    buf[n] = frame[n] * w;
  }
  detail::fft(buf);
  std::vector<double> mag(kFftSize / 2 + 1);
  for (int k = 0; k <= kFftSize / 2; ++k) mag[k] = std::abs(buf[k]);

  const auto& bank = detail::mel_bank();
  std::vector<double> out(kNumMelBins);
  for (int j = 0; j < kNumMelBins; ++j) {
    double e = 0.0;
    const auto& w = bank.weights[j];
    for (std::size_t i = 0; i < w.size(); ++i)
      e += w[i] * mag[bank.first_bin[j] + i];
    out[j] = std::log(std::max(e, kLogFloor));
  }
  return out;
}

// Regression deltas with window +-2 and edge replication:
//   d_t = sum_{n=1..2} n * (c_{t+n} - c_{t-n}) / (2 * sum n^2)
inline std::vector<std::vector<double>> delta(const std::vector<std::vector<double>>& feats) {
  const int t_count = static_cast<int>(feats.size());
  if (t_count == 0) return {};
  const int dim = static_cast<int>(feats[0].size());
  const double denom = 2.0 * (1.0 + 4.0);
  std::vector<std::vector<double>> out(t_count, std::vector<double>(dim, 0.0));
  auto clamp_t = [&](int t) { return std::clamp(t, 0, t_count - 1); };
  for (int t = 0; t < t_count; ++t)
    for (int n = 1; n <= 2; ++n) {
      const auto& fwd = feats[clamp_t(t + n)];
      const auto& bwd = feats[clamp_t(t - n)];
      for (int d = 0; d < dim; ++d)
        out[t][d] += n * (fwd[d] - bwd[d]) / denom;
    }
  return out;
}

// Full frontend: T x 80 with columns 0-39 the log-mel FBKs and 40-79 their
// deltas. Deterministic; propagates EmptySignal from framing.
inline FeatureMatrix extract_features(const AudioClip& clip, const FrontendConfig& cfg = {}) {
  auto frames = frame_signal(clip, cfg);
  std::vector<std::vector<double>> stat(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) stat[k] = log_mel_fbank(frames[k]);
  if (cfg.mean_normalize) {
    std::vector<double> mean(kNumMelBins, 0.0);
    for (const auto& row : stat)
      for (int d = 0; d < kNumMelBins; ++d) mean[d] += row[d];
    for (int d = 0; d < kNumMelBins; ++d) mean[d] /= static_cast<double>(stat.size());
    for (auto& row : stat)
      for (int d = 0; d < kNumMelBins; ++d) row[d] -= mean[d];
  }
  auto dyn = delta(stat);

  FeatureMatrix m;
  m.rows = static_cast<int>(frames.size());
  m.cols = kFeatureDim;
  m.values.resize(static_cast<std::size_t>(m.rows) * kFeatureDim);
  for (int t = 0; t < m.rows; ++t)
    for (int d = 0; d < kNumMelBins; ++d) {
      m.at(t, d) = static_cast<float>(stat[t][d]);
      m.at(t, kNumMelBins + d) = static_cast<float>(dyn[t][d]);
    }
  return m;
}

}  // namespace emodep::dsp
