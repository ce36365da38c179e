#pragma once

// Session-level depression classifiers: a bi-directional recurrence over the
// per-segment feature sequence, with the two final hidden states (64 each)
// concatenated and mapped to a single logit.
//
// Per-modality inputs:
//   emotion  S x dim   frozen-extractor features (128/320/448)
//   audio    S x 160   per-segment FBK mean + standard deviation
//   text     S x 768   per-segment utterance embeddings

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "emodep/dsp/features.hpp"
#include "emodep/emotion/types.hpp"
#include "emodep/errors.hpp"
#include "emodep/nn/rnn.hpp"
#include "emodep/transfer/extractor.hpp"

namespace emodep::depression {

using transfer::FeatureSeq;

enum class CellKind { lstm, gru };

inline constexpr int kHidden = 64;
inline constexpr int kAudioSummaryDim = 2 * dsp::kFeatureDim;  // mean + std

template <class T>
struct SessionClassifier {
  CellKind kind = CellKind::lstm;
  int input_dim = 0;
  nn::LstmCell<T> lstm_fwd, lstm_bwd;
  nn::GruCell<T> gru_fwd, gru_bwd;
  nn::Tensor<T> out_w;  // 2H x 1
  nn::Tensor<T> out_b;  // 1 x 1

  static SessionClassifier init(CellKind kind, int input_dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0xda3e39cb94b95bdbull);
    SessionClassifier c;
    c.kind = kind;
    c.input_dim = input_dim;
    if (kind == CellKind::lstm) {
      c.lstm_fwd = nn::LstmCell<T>::init(input_dim, kHidden, rng);
      c.lstm_bwd = nn::LstmCell<T>::init(input_dim, kHidden, rng);
    } else {
      c.gru_fwd = nn::GruCell<T>::init(input_dim, kHidden, rng);
      c.gru_bwd = nn::GruCell<T>::init(input_dim, kHidden, rng);
    }
    c.out_w = nn::xavier_uniform<T>(2 * kHidden, 1, rng);
    c.out_b = nn::zero_bias<T>(1);
    return c;
  }

  nn::Tensor<T> logit(const nn::Tensor<T>& seq) const {
    if (seq.rows() < 1) throw EmptySession("session classifier: empty feature sequence");
    if (seq.cols() != input_dim)
      throw ShapeError("session classifier: features are " +
                       nn::shape_str(seq.rows(), seq.cols()) + ", want Sx" +
                       std::to_string(input_dim));
    nn::Tensor<T> h = kind == CellKind::lstm
                          ? nn::bidi_last_hidden(lstm_fwd, lstm_bwd, seq)
                          : nn::bidi_last_hidden(gru_fwd, gru_bwd, seq);
    return nn::add_bias(nn::matmul(h, out_w), out_b);
  }

  // Depression probability, strictly inside (0, 1).
  double probability(const FeatureSeq& features) const {
    std::vector<T> v(features.values.begin(), features.values.end());
    nn::Tensor<T> seq = nn::Tensor<T>::from(features.rows, features.cols, std::move(v));
    double x = static_cast<double>(logit(seq).item());
    return 1.0 / (1.0 + std::exp(-x));
  }

  std::vector<std::pair<std::string, nn::Tensor<T>>> named_params() const {
    std::vector<std::pair<std::string, nn::Tensor<T>>> out;
    if (kind == CellKind::lstm) {
      lstm_fwd.collect("fwd", out);
      lstm_bwd.collect("bwd", out);
    } else {
      gru_fwd.collect("fwd", out);
      gru_bwd.collect("bwd", out);
    }
    out.emplace_back("out.w", out_w);
    out.emplace_back("out.b", out_b);
    return out;
  }

  std::vector<nn::Tensor<T>> params() const {
    std::vector<nn::Tensor<T>> out;
    for (auto& [name, t] : named_params()) out.push_back(t);
    return out;
  }
};

// Mean and (population) standard deviation per FBK column: 80 + 80 = 160.
// A constant column yields zero in the std half.
inline std::vector<float> audio_summary(const dsp::FeatureMatrix& m) {
  std::vector<float> out(kAudioSummaryDim, 0.0f);
  for (int d = 0; d < m.cols; ++d) {
    double sum = 0.0, sq = 0.0;
    for (int t = 0; t < m.rows; ++t) {
      double v = m.at(t, d);
      sum += v;
      sq += v * v;
    }
    double mean = sum / m.rows;
    double var = std::max(0.0, sq / m.rows - mean * mean);
    out[d] = static_cast<float>(mean);
    out[dsp::kFeatureDim + d] = static_cast<float>(std::sqrt(var));
  }
  return out;
}

inline FeatureSeq audio_session_features(const std::vector<emotion::EmotionSegment>& segments) {
  if (segments.empty()) throw EmptySession("audio features: session has no segments");
  FeatureSeq seq;
  seq.rows = static_cast<int>(segments.size());
  seq.cols = kAudioSummaryDim;
  for (const auto& seg : segments) {
    if (!seg.audio)
      throw ModalityMismatch("segment '" + seg.id + "' has no audio");
    auto s = audio_summary(*seg.audio);
    seq.values.insert(seq.values.end(), s.begin(), s.end());
  }
  return seq;
}

// The segment's own utterance embedding is the center row of its context
// window.
inline FeatureSeq text_session_features(const std::vector<emotion::EmotionSegment>& segments) {
  if (segments.empty()) throw EmptySession("text features: session has no segments");
  FeatureSeq seq;
  seq.rows = static_cast<int>(segments.size());
  seq.cols = emotion::kEmbeddingDim;
  for (const auto& seg : segments) {
    if (!seg.context)
      throw ModalityMismatch("segment '" + seg.id + "' has no utterance embedding");
    const float* center = seg.context->data() +
                          static_cast<std::size_t>(3) * emotion::kEmbeddingDim;
    seq.values.insert(seq.values.end(), center, center + emotion::kEmbeddingDim);
  }
  return seq;
}

}  // namespace emodep::depression
