#pragma once

// Finite-difference validation of the full emotion network in double
// precision: a random segment (T x 80 frames, 7 x 768 context) is pushed
// through forward + multitask loss and every parameter tensor is probed on a
// seeded subset of coordinates.

#include <random>

#include "emodep/emotion/loss.hpp"
#include "emodep/emotion/model.hpp"
#include "emodep/nn/grad_check.hpp"

namespace emodep::emotion {

inline EmotionSegment random_segment(Mode mode, int frames, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  EmotionSegment seg;
  seg.id = "gradcheck";
  dsp::FeatureMatrix fm;
  fm.rows = frames;
  fm.cols = dsp::kFeatureDim;
  fm.values.resize(static_cast<std::size_t>(frames) * dsp::kFeatureDim);
  for (auto& v : fm.values) v = static_cast<float>(gauss(rng));
  seg.audio = std::move(fm);
  std::vector<float> ctx(static_cast<std::size_t>(kContextWindow) * kEmbeddingDim);
  for (auto& v : ctx) v = static_cast<float>(gauss(rng));
  seg.context = std::move(ctx);
  if (mode == Mode::iemocap) {
    seg.label = static_cast<int>(rng() % kNumClasses);
    seg.attributes = std::array<float, 3>{2.4f, 3.2f, 3.9f};
  } else {
    seg.sentiment = rng() % 2 ? 1.7f : -1.7f;
  }
  return seg;
}

// Max relative gradient error of the A+T forward + training loss.
inline double full_model_grad_check(Mode mode, int frames = 20,
                                    int coords_per_param = 8,
                                    std::uint64_t seed = 42) {
  EmotionSegment seg = random_segment(mode, frames, seed);
  auto model = EmotionModel<double>::init(mode, Modality::audio_text, seed + 1);
  LossConfig loss_cfg;
  auto make_loss = [&]() {
    auto pred = model.forward(seg);
    return training_loss(model, pred, seg, loss_cfg);
  };
  return nn::grad_check(make_loss, model.params(), 1e-5, coords_per_param, seed + 2);
}

}  // namespace emodep::emotion
