#pragma once

#include <vector>

#include "emodep/emotion/model.hpp"
#include "emodep/emotion/types.hpp"
#include "emodep/errors.hpp"
#include "emodep/nn/tensor.hpp"

namespace emodep::emotion {

struct PenaltyWeights {
  double div = 0.1;     // inter-head diversity
  double spiky = 0.1;   // push ||a||^2 of spiky heads toward 1 (one-hot)
  double smooth = 0.1;  // push ||a||^2 of smooth heads toward 1/T (uniform)
};

// Attention regularizer over one heads x T row-stochastic matrix:
//   P = l_div * sum_{h != h'} (a_h . a_h')^2
//     + l_s   * sum_{spiky h} (1 - ||a_h||^2)^2
//     + l_u   * sum_{smooth h} (||a_h||^2 - 1/T)^2
// Each sub-term is exactly zero at its ideal configuration (one-hot heads,
// uniform heads, orthogonal one-hot pairs).
template <class T>
nn::Tensor<T> attention_penalty(const nn::Tensor<T>& attn, const PenaltyWeights& w,
                                int spiky_heads) {
  const int heads = attn.rows();
  const int t = attn.cols();
  nn::Tensor<T> ones = nn::Tensor<T>::full(t, 1, T(1));
  nn::Tensor<T> norms = nn::matmul(nn::mul(attn, attn), ones);  // heads x 1, ||a_h||^2
  nn::Tensor<T> gram = nn::matmul(attn, nn::transpose(attn));   // heads x heads
  // off-diagonal squared dot products = sum(G*G) - sum(diag^2)
  nn::Tensor<T> div = nn::sub(nn::sum(nn::mul(gram, gram)), nn::sum(nn::mul(norms, norms)));
  nn::Tensor<T> penalty = nn::scale(div, static_cast<T>(w.div));
  if (spiky_heads > 0) {
    nn::Tensor<T> s = nn::affine(nn::slice_rows(norms, 0, spiky_heads), T(-1), T(1));
    penalty = nn::add(penalty, nn::scale(nn::sum(nn::mul(s, s)), static_cast<T>(w.spiky)));
  }
  if (spiky_heads < heads) {
    nn::Tensor<T> u = nn::affine(nn::slice_rows(norms, spiky_heads, heads - spiky_heads),
                                 T(1), T(-1) / static_cast<T>(t));
    penalty = nn::add(penalty, nn::scale(nn::sum(nn::mul(u, u)), static_cast<T>(w.smooth)));
  }
  return penalty;
}

struct LossConfig {
  double attr_weight = 1.0;
  double huber_delta = 1.0;
  PenaltyWeights penalties;
};

// Per-segment training loss.
// iemocap: CE(class logits) + w_attr * sum Huber(attribute residuals) + penalties.
// mosei:   BCE on the sentiment sign + penalties (same weights).
template <class T>
nn::Tensor<T> training_loss(const EmotionModel<T>& model, const EmotionPrediction<T>& pred,
                            const EmotionSegment& seg, const LossConfig& cfg) {
  nn::Tensor<T> loss;
  if (model.mode == Mode::iemocap) {
    if (!seg.label)
      throw LabelMissing("segment '" + seg.id + "' has no categorical label");
    if (!seg.attributes)
      throw LabelMissing("segment '" + seg.id + "' has no attribute labels");
    loss = nn::softmax_cross_entropy(*pred.class_logits, {*seg.label});
    std::vector<T> targets((*seg.attributes).begin(), (*seg.attributes).end());
    nn::Tensor<T> hub = nn::huber_sum(*pred.attribute_preds, targets,
                                      static_cast<T>(cfg.huber_delta));
    loss = nn::add(loss, nn::scale(hub, static_cast<T>(cfg.attr_weight)));
  } else {
    if (!seg.sentiment)
      throw LabelMissing("segment '" + seg.id + "' has no sentiment score");
    std::vector<T> target = {*seg.sentiment > 0 ? T(1) : T(0)};
    loss = nn::bce_with_logits(*pred.sentiment_logit, target);
  }
  if (pred.audio_attention)
    loss = nn::add(loss, attention_penalty(*pred.audio_attention, cfg.penalties,
                                           model.cfg.spiky_heads));
  if (pred.text_attention)
    loss = nn::add(loss, attention_penalty(*pred.text_attention, cfg.penalties,
                                           model.cfg.spiky_heads));
  return loss;
}

}  // namespace emodep::emotion
