#pragma once

// Two-branch emotion recognizer.
//
// Audio branch: four TDNN layers (width 512, residual skips where the stream
// width is unchanged) over T x 80 filterbank features, then five-head
// self-attentive pooling projected to 128-d. Text branch: a shared FC maps
// each of the 7 context embeddings 768 -> 256 with tanh, then five-head
// self-attentive pooling projected to 320-d. Branch outputs are concatenated
// (448-d for A+T), passed through a fusion FC (128-d, ReLU) and into the
// mode-specific heads: 4 class logits + 3 attribute regressors (iemocap) or
// one sentiment logit (mosei).

#include <algorithm>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "emodep/emotion/types.hpp"
#include "emodep/errors.hpp"
#include "emodep/nn/checkpoint.hpp"
#include "emodep/nn/init.hpp"
#include "emodep/nn/tensor.hpp"

namespace emodep::emotion {

using nn::Tensor;

struct EmotionNetConfig {
  int tdnn_width = 512;
  // Per-layer temporal offsets. The first layer sees a dense [-2,+2] window;
  // later splices are sparse. The stack consumes 15 frames of context in
  // total, so the output length is T - 15.
  std::vector<std::vector<int>> tdnn_contexts = {{-2, -1, 0, 1, 2}, {-1, 2}, {-3, 3}, {0, 2}};
  int attention_heads = 5;
  int attention_hidden = 64;
  int spiky_heads = 3;  // heads [0, spiky) spiky, the rest smooth
  int audio_out = 128;
  int text_hidden = 256;
  int text_out = 320;
  int fusion_width = 128;
};

inline int tdnn_total_context(const EmotionNetConfig& cfg) {
  int total = 0;
  for (const auto& offs : cfg.tdnn_contexts) {
    auto [lo, hi] = std::minmax_element(offs.begin(), offs.end());
    total += *hi - *lo;
  }
  return total;
}

template <class T>
Tensor<T> to_tensor(const dsp::FeatureMatrix& m) {
  std::vector<T> v(m.values.begin(), m.values.end());
  return Tensor<T>::from(m.rows, m.cols, std::move(v));
}

template <class T>
Tensor<T> context_tensor(const std::vector<float>& ctx) {
  if (static_cast<int>(ctx.size()) != kContextWindow * kEmbeddingDim)
    throw ShapeError("context window has " + std::to_string(ctx.size()) +
                     " values, want 7x768");
  std::vector<T> v(ctx.begin(), ctx.end());
  return Tensor<T>::from(kContextWindow, kEmbeddingDim, std::move(v));
}

template <class T>
struct TdnnLayer {
  std::vector<int> offsets;  // sorted ascending
  Tensor<T> w;               // (|offsets| * in) x width
  Tensor<T> b;               // 1 x width
  bool residual = false;

  static TdnnLayer init(std::vector<int> offsets, int in_dim, int width,
                        std::mt19937_64& rng) {
    std::sort(offsets.begin(), offsets.end());
    TdnnLayer l;
    l.offsets = std::move(offsets);
    l.w = nn::xavier_uniform<T>(static_cast<int>(l.offsets.size()) * in_dim, width, rng);
    l.b = nn::zero_bias<T>(width);
    l.residual = in_dim == width;
    return l;
  }

  // T x in -> (T - span) x width where span = max(offsets) - min(offsets).
  Tensor<T> forward(const Tensor<T>& h) const {
    const int lo = offsets.front(), hi = offsets.back();
    const int out_rows = h.rows() - (hi - lo);
    if (out_rows < 1)
      throw SequenceTooShort("tdnn layer: " + std::to_string(h.rows()) +
                             " frames cannot cover context [" + std::to_string(lo) +
                             ", " + std::to_string(hi) + "]");
    Tensor<T> spliced = nn::slice_rows(h, offsets[0] - lo, out_rows);
    for (std::size_t i = 1; i < offsets.size(); ++i)
      spliced = nn::concat_cols(spliced, nn::slice_rows(h, offsets[i] - lo, out_rows));
    Tensor<T> out = nn::relu(nn::add_bias(nn::matmul(spliced, w), b));
    if (residual) out = nn::add(out, nn::slice_rows(h, -lo, out_rows));
    return out;
  }
};

// Structured self-attentive pooling: scores = W2 tanh(W1 H^T), A is the
// row-softmax (heads x T), and the flattened head readouts A H are projected
// to the branch output size.
template <class T>
struct AttentionPool {
  Tensor<T> w1;      // hidden x d
  Tensor<T> w2;      // heads x hidden
  Tensor<T> proj_w;  // (heads * d) x out
  Tensor<T> proj_b;  // 1 x out

  static AttentionPool init(int d, int hidden, int heads, int out, std::mt19937_64& rng) {
    AttentionPool p;
    p.w1 = nn::xavier_uniform<T>(hidden, d, rng);
    p.w2 = nn::xavier_uniform<T>(heads, hidden, rng);
    p.proj_w = nn::xavier_uniform<T>(heads * d, out, rng);
    p.proj_b = nn::zero_bias<T>(out);
    return p;
  }

  struct Result {
    Tensor<T> pooled;     // 1 x out
    Tensor<T> attention;  // heads x T, rows sum to 1
  };

  Result forward(const Tensor<T>& h) const {
    Tensor<T> scores = nn::matmul(w2, nn::tanh(nn::matmul(w1, nn::transpose(h))));
    Tensor<T> attn = nn::softmax_rows(scores);
    Tensor<T> heads = nn::matmul(attn, h);
    Tensor<T> flat = nn::reshape(heads, 1, heads.rows() * heads.cols());
    Tensor<T> pooled = nn::add_bias(nn::matmul(flat, proj_w), proj_b);
    return {pooled, attn};
  }
};

template <class T>
struct EmotionPrediction {
  std::optional<Tensor<T>> class_logits;     // 1 x 4
  std::optional<Tensor<T>> attribute_preds;  // 1 x 3
  std::optional<Tensor<T>> sentiment_logit;  // 1 x 1
  std::optional<Tensor<T>> audio_feature;    // 1 x 128, input to fusion
  std::optional<Tensor<T>> text_feature;     // 1 x 320, input to fusion
  std::optional<Tensor<T>> audio_attention;  // 5 x T'
  std::optional<Tensor<T>> text_attention;   // 5 x 7
};

template <class T>
struct EmotionModel {
  Mode mode = Mode::iemocap;
  Modality modality = Modality::audio_text;
  EmotionNetConfig cfg;

  std::vector<TdnnLayer<T>> tdnn;
  AttentionPool<T> audio_pool;
  Tensor<T> text_fc_w, text_fc_b;  // 768 -> 256
  AttentionPool<T> text_pool;
  Tensor<T> fuse_w, fuse_b;        // fusion input -> 128
  Tensor<T> class_w, class_b;      // 128 -> 4
  Tensor<T> attr_w, attr_b;        // 128 -> 3
  Tensor<T> sent_w, sent_b;        // 128 -> 1

  static EmotionModel init(Mode mode, Modality modality, std::uint64_t seed,
                           EmotionNetConfig cfg = {}) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    EmotionModel m;
    m.mode = mode;
    m.modality = modality;
    m.cfg = cfg;
    if (uses_audio(modality)) {
      int in = dsp::kFeatureDim;
      for (const auto& offs : cfg.tdnn_contexts) {
        m.tdnn.push_back(TdnnLayer<T>::init(offs, in, cfg.tdnn_width, rng));
        in = cfg.tdnn_width;
      }
      m.audio_pool = AttentionPool<T>::init(cfg.tdnn_width, cfg.attention_hidden,
                                            cfg.attention_heads, cfg.audio_out, rng);
    }
    if (uses_text(modality)) {
      m.text_fc_w = nn::xavier_uniform<T>(kEmbeddingDim, cfg.text_hidden, rng);
      m.text_fc_b = nn::zero_bias<T>(cfg.text_hidden);
      m.text_pool = AttentionPool<T>::init(cfg.text_hidden, cfg.attention_hidden,
                                           cfg.attention_heads, cfg.text_out, rng);
    }
    m.fuse_w = nn::xavier_uniform<T>(m.fusion_input_dim(), cfg.fusion_width, rng);
    m.fuse_b = nn::zero_bias<T>(cfg.fusion_width);
    if (mode == Mode::iemocap) {
      m.class_w = nn::xavier_uniform<T>(cfg.fusion_width, kNumClasses, rng);
      m.class_b = nn::zero_bias<T>(kNumClasses);
      m.attr_w = nn::xavier_uniform<T>(cfg.fusion_width, kNumAttributes, rng);
      m.attr_b = nn::zero_bias<T>(kNumAttributes);
    } else {
      m.sent_w = nn::xavier_uniform<T>(cfg.fusion_width, 1, rng);
      m.sent_b = nn::zero_bias<T>(1);
    }
    return m;
  }

  int fusion_input_dim() const {
    switch (modality) {
      case Modality::audio: return cfg.audio_out;
      case Modality::text: return cfg.text_out;
      default: return cfg.audio_out + cfg.text_out;
    }
  }

  // Feature dimension exposed to downstream transfer (input to the fusion FC).
  int feature_dim() const { return fusion_input_dim(); }

  // T x 80 -> T' x 512 through the TDNN stack; valid-context frames only.
  Tensor<T> res_tdnn_forward(const Tensor<T>& frames) const {
    int need = tdnn_total_context(cfg) + 1;
    if (frames.rows() < need)
      throw SequenceTooShort("audio branch: " + std::to_string(frames.rows()) +
                             " frames, need at least " + std::to_string(need));
    Tensor<T> h = frames;
    for (const auto& layer : tdnn) h = layer.forward(h);
    return h;
  }

  typename AttentionPool<T>::Result audio_branch(const Tensor<T>& frames) const {
    return audio_pool.forward(res_tdnn_forward(frames));
  }

  typename AttentionPool<T>::Result text_branch(const Tensor<T>& context) const {
    if (context.rows() != kContextWindow || context.cols() != kEmbeddingDim)
      throw ShapeError("text branch: context is " +
                       nn::shape_str(context.rows(), context.cols()) +
                       ", want (7x768)");
    Tensor<T> reduced = nn::tanh(nn::add_bias(nn::matmul(context, text_fc_w), text_fc_b));
    return text_pool.forward(reduced);
  }

  EmotionPrediction<T> forward(const EmotionSegment& seg) const {
    if (uses_audio(modality) && !seg.audio)
      throw ModalityMismatch("segment '" + seg.id + "' has no audio for modality " +
                             to_string(modality));
    if (uses_text(modality) && !seg.context)
      throw ModalityMismatch("segment '" + seg.id + "' has no context embeddings for modality " +
                             to_string(modality));

    EmotionPrediction<T> pred;
    Tensor<T> fused_in;
    if (uses_audio(modality)) {
      auto a = audio_branch(to_tensor<T>(*seg.audio));
      pred.audio_feature = a.pooled;
      pred.audio_attention = a.attention;
      fused_in = a.pooled;
    }
    if (uses_text(modality)) {
      auto t = text_branch(context_tensor<T>(*seg.context));
      pred.text_feature = t.pooled;
      pred.text_attention = t.attention;
      fused_in = fused_in.defined() ? nn::concat_cols(fused_in, t.pooled) : t.pooled;
    }
    Tensor<T> z = nn::relu(nn::add_bias(nn::matmul(fused_in, fuse_w), fuse_b));
    if (mode == Mode::iemocap) {
      pred.class_logits = nn::add_bias(nn::matmul(z, class_w), class_b);
      pred.attribute_preds = nn::add_bias(nn::matmul(z, attr_w), attr_b);
    } else {
      pred.sentiment_logit = nn::add_bias(nn::matmul(z, sent_w), sent_b);
    }
    return pred;
  }

  std::vector<std::pair<std::string, Tensor<T>>> named_params() const {
    std::vector<std::pair<std::string, Tensor<T>>> out;
    if (uses_audio(modality)) {
      for (std::size_t i = 0; i < tdnn.size(); ++i) {
        out.emplace_back("tdnn" + std::to_string(i) + ".w", tdnn[i].w);
        out.emplace_back("tdnn" + std::to_string(i) + ".b", tdnn[i].b);
      }
      out.emplace_back("audio_pool.w1", audio_pool.w1);
      out.emplace_back("audio_pool.w2", audio_pool.w2);
      out.emplace_back("audio_pool.proj_w", audio_pool.proj_w);
      out.emplace_back("audio_pool.proj_b", audio_pool.proj_b);
    }
    if (uses_text(modality)) {
      out.emplace_back("text_fc.w", text_fc_w);
      out.emplace_back("text_fc.b", text_fc_b);
      out.emplace_back("text_pool.w1", text_pool.w1);
      out.emplace_back("text_pool.w2", text_pool.w2);
      out.emplace_back("text_pool.proj_w", text_pool.proj_w);
      out.emplace_back("text_pool.proj_b", text_pool.proj_b);
    }
    out.emplace_back("fuse.w", fuse_w);
    out.emplace_back("fuse.b", fuse_b);
    if (mode == Mode::iemocap) {
      out.emplace_back("head.class.w", class_w);
      out.emplace_back("head.class.b", class_b);
      out.emplace_back("head.attr.w", attr_w);
      out.emplace_back("head.attr.b", attr_b);
    } else {
      out.emplace_back("head.sent.w", sent_w);
      out.emplace_back("head.sent.b", sent_b);
    }
    return out;
  }

  std::vector<Tensor<T>> params() const {
    std::vector<Tensor<T>> out;
    for (auto& [name, t] : named_params()) out.push_back(t);
    return out;
  }

  void set_requires_grad(bool b) {
    for (auto&& [name, t] : named_params()) t.set_requires_grad(b);
  }
};

}  // namespace emodep::emotion
