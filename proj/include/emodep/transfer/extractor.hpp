#pragma once

// Frozen-extractor transfer: a pretrained emotion model with fixed parameters
// emits per-segment features taken at the input to its fusion layer (the
// concatenated branch outputs: 128-d audio, 320-d text, 448-d A+T).

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "emodep/emotion/io.hpp"
#include "emodep/emotion/model.hpp"
#include "emodep/errors.hpp"
#include "emodep/util/hash.hpp"

namespace emodep::transfer {

using emotion::EmotionSegment;

struct FrozenExtractor {
  emotion::EmotionModel<float> model;
  std::uint64_t hash = 0;  // checkpoint content hash
  dsp::FrontendConfig frontend;  // frontend the model was pretrained with

  int feature_dim() const { return model.feature_dim(); }
  // Recomputes the content hash from live parameters; used to assert that
  // downstream training never mutates the extractor.
  std::uint64_t current_hash() const { return nn::content_hash(model.named_params()); }
};

inline FrozenExtractor freeze(emotion::EmotionModel<float> model) {
  model.set_requires_grad(false);
  FrozenExtractor ex;
  ex.hash = nn::content_hash(model.named_params());
  ex.model = std::move(model);
  return ex;
}

inline FrozenExtractor load_frozen(const std::string& ckpt_path) {
  auto lm = emotion::load_emotion_model(ckpt_path);
  FrozenExtractor ex = freeze(std::move(lm.model));
  ex.hash = lm.hash;  // identical to the recomputed hash by construction
  ex.frontend = lm.frontend;
  return ex;
}

// Frozen forward up to (exclusive) the fusion FC; A+T output is the
// concatenation of the two branch outputs. Deterministic.
inline std::vector<float> extract_segment(const FrozenExtractor& ex, const EmotionSegment& seg) {
  const auto& m = ex.model;
  if (emotion::uses_audio(m.modality) && !seg.audio)
    throw ModalityMismatch("segment '" + seg.id + "' has no audio for extractor modality " +
                           emotion::to_string(m.modality));
  if (emotion::uses_text(m.modality) && !seg.context)
    throw ModalityMismatch("segment '" + seg.id + "' has no context embeddings for extractor modality " +
                           emotion::to_string(m.modality));
  std::vector<float> out;
  out.reserve(ex.feature_dim());
  if (emotion::uses_audio(m.modality)) {
    auto a = m.audio_branch(emotion::to_tensor<float>(*seg.audio));
    out.insert(out.end(), a.pooled.value().begin(), a.pooled.value().end());
  }
  if (emotion::uses_text(m.modality)) {
    auto t = m.text_branch(emotion::context_tensor<float>(*seg.context));
    out.insert(out.end(), t.pooled.value().begin(), t.pooled.value().end());
  }
  return out;
}

// S x dim feature sequence, one row per segment in temporal order.
struct FeatureSeq {
  int rows = 0;
  int cols = 0;
  std::vector<float> values;  // row-major

  const float* row(int r) const { return values.data() + static_cast<std::size_t>(r) * cols; }
};

inline FeatureSeq extract_session(const FrozenExtractor& ex,
                                  const std::vector<EmotionSegment>& segments) {
  if (segments.empty()) throw EmptySession("extract_session: session has no segments");
  FeatureSeq seq;
  seq.rows = static_cast<int>(segments.size());
  seq.cols = ex.feature_dim();
  seq.values.reserve(static_cast<std::size_t>(seq.rows) * seq.cols);
  for (const auto& seg : segments) {
    auto v = extract_segment(ex, seg);
    seq.values.insert(seq.values.end(), v.begin(), v.end());
  }
  return seq;
}

// Per-session feature cache file, keyed by the extractor checkpoint hash:
//   magic "EDFC", u32 version, u32 segment count, u32 dim,
//   u64 checkpoint hash, row-major little-endian float32 payload.
inline void save_feature_cache(const std::string& path, std::uint64_t ckpt_hash,
                               const FeatureSeq& seq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write feature cache: " + path);
  auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i) & 0xff);
    out.write(reinterpret_cast<char*>(b), 4);
  };
  out.write("EDFC", 4);
  put_u32(1);
  put_u32(static_cast<std::uint32_t>(seq.rows));
  put_u32(static_cast<std::uint32_t>(seq.cols));
  unsigned char hb[8];
  for (int i = 0; i < 8; ++i) hb[i] = static_cast<unsigned char>(ckpt_hash >> (8 * i) & 0xff);
  out.write(reinterpret_cast<char*>(hb), 8);
  out.write(reinterpret_cast<const char*>(seq.values.data()),
            static_cast<std::streamsize>(seq.values.size() * 4));
  if (!out) throw IoError("short write: " + path);
}

struct CachedFeatures {
  std::uint64_t ckpt_hash = 0;
  FeatureSeq seq;
};

inline CachedFeatures load_feature_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("feature cache not found: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 24 || std::memcmp(bytes.data(), "EDFC", 4) != 0)
    throw ChecksumError(path + ": not a feature cache file");
  auto u32 = [&](std::size_t off) {
    return std::uint32_t(bytes[off]) | std::uint32_t(bytes[off + 1]) << 8 |
           std::uint32_t(bytes[off + 2]) << 16 | std::uint32_t(bytes[off + 3]) << 24;
  };
  if (u32(4) != 1) throw InvalidInput(path + ": unsupported feature cache version");
  CachedFeatures cf;
  cf.seq.rows = static_cast<int>(u32(8));
  cf.seq.cols = static_cast<int>(u32(12));
  for (int i = 7; i >= 0; --i) cf.ckpt_hash = cf.ckpt_hash << 8 | bytes[16 + i];
  std::size_t n = static_cast<std::size_t>(cf.seq.rows) * cf.seq.cols;
  if (bytes.size() != 24 + n * 4)
    throw ChecksumError(path + ": payload size mismatch (corrupt or truncated)");
  cf.seq.values.resize(n);
  std::memcpy(cf.seq.values.data(), bytes.data() + 24, n * 4);
  return cf;
}

}  // namespace emodep::transfer
