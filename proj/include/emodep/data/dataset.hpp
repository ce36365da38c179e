#pragma once

// Turns a validated manifest into in-memory segments and sessions: WAVs run
// through the DSP frontend, embeddings load into 7x768 context windows built
// from each session's own utterance order (edge replication at boundaries).
// MOSEI segments with sentiment exactly 0 are excluded at ingestion so the
// binary sign label is always defined.

#include <map>
#include <string>
#include <vector>

#include "emodep/data/embedding_io.hpp"
#include "emodep/data/manifest.hpp"
#include "emodep/dsp/features.hpp"
#include "emodep/dsp/wav.hpp"
#include "emodep/emotion/types.hpp"
#include "emodep/errors.hpp"

namespace emodep::data {

struct LoadOptions {
  bool need_audio = true;
  bool need_text = true;
  dsp::FrontendConfig frontend;
};

struct EmotionDataset {
  std::vector<emotion::EmotionSegment> train;
  std::vector<emotion::EmotionSegment> dev;
};

struct DepressionSession {
  std::string id;
  int label = 0;
  std::string split;
  std::vector<emotion::EmotionSegment> segments;
};

struct DepressionDataset {
  std::vector<DepressionSession> train;
  std::vector<DepressionSession> dev;
};

namespace detail {

// Groups manifest entries by session, preserving manifest order both across
// sessions and within each session.
inline std::vector<std::pair<std::string, std::vector<const ManifestEntry*>>>
group_by_session(const Manifest& m) {
  std::vector<std::pair<std::string, std::vector<const ManifestEntry*>>> out;
  std::map<std::string, std::size_t> index;
  for (const auto& e : m.entries) {
    auto [it, fresh] = index.emplace(e.session_id, out.size());
    if (fresh) out.emplace_back(e.session_id, std::vector<const ManifestEntry*>{});
    out[it->second].second.push_back(&e);
  }
  return out;
}

inline std::vector<emotion::EmotionSegment> build_segments(
    const std::vector<const ManifestEntry*>& entries, const Manifest& m,
    const LoadOptions& opt) {
  std::vector<std::vector<float>> embeddings;
  if (opt.need_text) {
    embeddings.reserve(entries.size());
    for (const auto* e : entries) {
      if (!e->embedding_path)
        throw ModalityMismatch("segment '" + e->segment_id + "' has no embedding path");
      embeddings.push_back(load_embedding(*e->embedding_path));
    }
  }
  std::vector<const std::vector<float>*> embedding_ptrs;
  for (const auto& e : embeddings) embedding_ptrs.push_back(&e);

  std::vector<emotion::EmotionSegment> segs;
  for (std::size_t t = 0; t < entries.size(); ++t) {
    const auto* e = entries[t];
    emotion::EmotionSegment seg;
    seg.id = e->segment_id;
    if (opt.need_audio) {
      if (!e->wav_path)
        throw ModalityMismatch("segment '" + e->segment_id + "' has no wav path");
      dsp::AudioClip clip = dsp::read_wav(*e->wav_path);
      clip.id = e->segment_id;
      seg.audio = dsp::extract_features(clip, opt.frontend);
    }
    if (opt.need_text)
      seg.context = emotion::context_window(embedding_ptrs, static_cast<int>(t));
    if (e->categorical) seg.label = emotion::class_from_string(*e->categorical);
    seg.attributes = e->attributes;
    seg.sentiment = e->sentiment;
    segs.push_back(std::move(seg));
  }
  return segs;
}

}  // namespace detail

inline EmotionDataset load_emotion_dataset(const Manifest& m, const LoadOptions& opt) {
  if (m.mode == ManifestMode::depression)
    throw InvalidInput("load_emotion_dataset: manifest mode is 'depression'");
  EmotionDataset ds;
  for (const auto& [session_id, entries] : detail::group_by_session(m)) {
    auto segs = detail::build_segments(entries, m, opt);
    for (std::size_t i = 0; i < segs.size(); ++i) {
      if (m.mode == ManifestMode::mosei && segs[i].sentiment && *segs[i].sentiment == 0.0f)
        continue;  // sign undefined; excluded at ingestion
      (entries[i]->split == "train" ? ds.train : ds.dev).push_back(std::move(segs[i]));
    }
  }
  return ds;
}

inline DepressionDataset load_depression_dataset(const Manifest& m, const LoadOptions& opt) {
  if (m.mode != ManifestMode::depression)
    throw InvalidInput("load_depression_dataset: manifest mode is '" +
                       to_string(m.mode) + "', want depression");
  DepressionDataset ds;
  for (const auto& [session_id, entries] : detail::group_by_session(m)) {
    DepressionSession s;
    s.id = session_id;
    s.label = *entries.front()->depression_label;
    s.split = entries.front()->split;
    s.segments = detail::build_segments(entries, m, opt);
    (s.split == "train" ? ds.train : ds.dev).push_back(std::move(s));
  }
  return ds;
}

}  // namespace emodep::data
