#pragma once

// Synthetic stand-in corpora for the licensed datasets.
//
// Embeddings are Gaussian clusters around class means placed on scaled
// orthonormal directions: the pairwise distance between means is
// margin * covariance_scale while per-sample noise is norm-clamped at
// covariance_scale, so clusters are strictly separated for margin > 2 and a
// nearest-centroid classifier is exact by construction. Audio is a
// class-dependent two-tone mixture plus low white noise. Depression sessions
// draw a fixed majority of their segments from their group's cluster family
// (negative/positive sentiment, or sad+angry vs happy+neutral), which keeps
// session-level classes separable as well.
//
// All cluster geometry derives from the spec seed alone, so corpora generated
// in separate calls with the same seed (e.g. a mosei pretraining corpus and a
// depression corpus) share the same embedding space.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "emodep/data/embedding_io.hpp"
#include "emodep/data/manifest.hpp"
#include "emodep/dsp/wav.hpp"
#include "emodep/emotion/types.hpp"
#include "emodep/errors.hpp"
#include "emodep/util/hash.hpp"

namespace emodep::data {

struct SyntheticSpec {
  std::uint64_t seed = 0;
  ManifestMode mode = ManifestMode::iemocap;

  // Emotion corpora: segments per class (4 iemocap classes, 2 mosei signs).
  int train_per_class = 50;
  int dev_per_class = 20;
  int dialogue_length = 8;  // consecutive segments per synthetic dialogue

  // Depression corpora: sessions per group (healthy, depressed).
  int train_sessions_per_group = 20;
  int dev_sessions_per_group = 8;
  int segments_per_session_min = 8;
  int segments_per_session_max = 12;
  ManifestMode depression_source = ManifestMode::mosei;
  double major_fraction = 0.85;  // per-session fraction drawn from the own family

  double margin = 5.0;
  double covariance_scale = 1.0;
  double clip_seconds_min = 0.26;
  double clip_seconds_max = 0.40;
};

inline void validate(const SyntheticSpec& s) {
  if (!(s.margin > 0)) throw InvalidSpec("synthetic spec: margin must be > 0");
  if (s.train_per_class < 2 || s.dev_per_class < 2)
    throw InvalidSpec("synthetic spec: need at least 2 segments per class per split");
  if (s.train_sessions_per_group < 2 || s.dev_sessions_per_group < 2)
    throw InvalidSpec("synthetic spec: need at least 2 sessions per group per split");
  if (s.segments_per_session_min < 1 ||
      s.segments_per_session_max < s.segments_per_session_min)
    throw InvalidSpec("synthetic spec: bad segments-per-session range");
  if (s.dialogue_length < 1) throw InvalidSpec("synthetic spec: dialogue_length must be >= 1");
  if (s.clip_seconds_min < 0.2 || s.clip_seconds_max < s.clip_seconds_min)
    throw InvalidSpec("synthetic spec: clip length range must be within [0.2s, ...]");
  if (!(s.major_fraction > 0.5 && s.major_fraction <= 1.0))
    throw InvalidSpec("synthetic spec: major_fraction must be in (0.5, 1]");
  if (s.depression_source == ManifestMode::depression)
    throw InvalidSpec("synthetic spec: depression_source must be iemocap or mosei");
}

struct ClusterGeometry {
  std::vector<std::vector<float>> emotion_means;    // 4 x 768
  std::vector<std::vector<float>> sentiment_means;  // 2 x 768 (neg, pos)
  double noise_sigma = 0.0;
  double noise_clamp = 0.0;
};

// Deterministic function of (seed, margin, covariance_scale) only.
inline ClusterGeometry make_geometry(std::uint64_t seed, double margin,
                                     double covariance_scale) {
  std::mt19937_64 rng(seed ^ 0x5de1c7e0a5u);
  ClusterGeometry g;
  g.noise_sigma = 0.03 * covariance_scale;
  g.noise_clamp = covariance_scale;
  const double mean_scale = margin * covariance_scale / std::sqrt(2.0);

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> dirs;
  for (int k = 0; k < 6; ++k) {
    std::vector<double> v(emotion::kEmbeddingDim);
    for (auto& x : v) x = gauss(rng);
    // Gram-Schmidt against previous directions
    for (const auto& u : dirs) {
      double dot = 0.0;
      for (int i = 0; i < emotion::kEmbeddingDim; ++i) dot += v[i] * u[i];
      for (int i = 0; i < emotion::kEmbeddingDim; ++i) v[i] -= dot * u[i];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    dirs.push_back(std::move(v));
  }
  auto scaled = [&](const std::vector<double>& u) {
    std::vector<float> m(emotion::kEmbeddingDim);
    for (int i = 0; i < emotion::kEmbeddingDim; ++i)
      m[i] = static_cast<float>(u[i] * mean_scale);
    return m;
  };
  for (int c = 0; c < 4; ++c) g.emotion_means.push_back(scaled(dirs[c]));
  g.sentiment_means.push_back(scaled(dirs[4]));
  g.sentiment_means.push_back(scaled(dirs[5]));
  return g;
}

namespace detail {

// Two-tone frequency pairs per emotion class and per sentiment sign.
inline constexpr double kEmotionTones[4][2] = {
    {350.0, 2800.0},  // angry
    {650.0, 1700.0},  // happy
    {480.0, 1150.0},  // sad
    {900.0, 3300.0},  // neutral
};
inline constexpr double kSentimentTones[2][2] = {
    {420.0, 2200.0},  // negative
    {750.0, 1500.0},  // positive
};
inline constexpr double kAttributeMeans[4][3] = {
    {1.6, 4.4, 4.2},  // angry: negative, excited, strong
    {4.4, 4.1, 3.6},  // happy
    {1.8, 1.9, 2.1},  // sad
    {3.0, 3.0, 3.0},  // neutral
};

inline std::vector<float> sample_embedding(std::mt19937_64& rng,
                                           const std::vector<float>& mean,
                                           const ClusterGeometry& g) {
  std::normal_distribution<double> gauss(0.0, g.noise_sigma);
  std::vector<double> noise(mean.size());
  double norm = 0.0;
  for (auto& x : noise) {
    x = gauss(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  double scale = norm > g.noise_clamp ? g.noise_clamp / norm : 1.0;
  std::vector<float> out(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i)
    out[i] = mean[i] + static_cast<float>(noise[i] * scale);
  return out;
}

inline dsp::AudioClip synth_clip(std::mt19937_64& rng, const double tones[2],
                                 double seconds_min, double seconds_max,
                                 const std::string& id) {
  std::uniform_real_distribution<double> dur(seconds_min, seconds_max);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> jitter(0.9, 1.1);
  std::uniform_real_distribution<double> white(-1.0, 1.0);
  int n = static_cast<int>(dur(rng) * dsp::kSampleRate);
  double a1 = 0.28 * jitter(rng), a2 = 0.22 * jitter(rng);
  double p1 = phase(rng), p2 = phase(rng);
  dsp::AudioClip clip;
  clip.id = id;
  clip.samples.resize(n);
  for (int t = 0; t < n; ++t) {
    double x = a1 * std::sin(2.0 * M_PI * tones[0] * t / dsp::kSampleRate + p1) +
               a2 * std::sin(2.0 * M_PI * tones[1] * t / dsp::kSampleRate + p2) +
               0.004 * white(rng);
    clip.samples[t] = static_cast<std::int16_t>(std::clamp(x, -0.999, 0.999) * 32767.0);
  }
  return clip;
}

}  // namespace detail

// Writes wav/, emb/ and manifest.jsonl under out_dir; returns the manifest.
// Byte-identical output for identical specs.
inline Manifest gen_synthetic(const SyntheticSpec& spec, const std::string& out_dir) {
  validate(spec);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "wav", ec);
  fs::create_directories(fs::path(out_dir) / "emb", ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

  ClusterGeometry geom = make_geometry(spec.seed, spec.margin, spec.covariance_scale);
  std::mt19937_64 rng(spec.seed * 0x2545f4914f6cdd1dull + static_cast<int>(spec.mode) + 1);

  Manifest m;
  m.mode = spec.mode;
  const std::string tag = to_string(spec.mode);

  auto write_segment = [&](const std::string& seg_id, const double tones[2],
                           const std::vector<float>& mean) {
    ManifestEntry e;
    e.segment_id = seg_id;
    std::string wav_rel = "wav/" + seg_id + ".wav";
    std::string emb_rel = "emb/" + seg_id + ".f32";
    dsp::write_wav((fs::path(out_dir) / wav_rel).string(),
                   detail::synth_clip(rng, tones, spec.clip_seconds_min,
                                      spec.clip_seconds_max, seg_id));
    save_embedding((fs::path(out_dir) / emb_rel).string(),
                   detail::sample_embedding(rng, mean, geom));
    e.wav_path = wav_rel;
    e.embedding_path = emb_rel;
    return e;
  };

  if (spec.mode == ManifestMode::iemocap || spec.mode == ManifestMode::mosei) {
    const int n_classes = spec.mode == ManifestMode::iemocap ? 4 : 2;
    for (const char* split : {"train", "dev"}) {
      int per_class = split == std::string("train") ? spec.train_per_class
                                                    : spec.dev_per_class;
      std::vector<int> deck;
      for (int c = 0; c < n_classes; ++c)
        deck.insert(deck.end(), per_class, c);
      std::shuffle(deck.begin(), deck.end(), rng);
      for (std::size_t i = 0; i < deck.size(); ++i) {
        int c = deck[i];
        char seg_id[64];
        std::snprintf(seg_id, sizeof seg_id, "%s_%s_%05zu", tag.c_str(), split, i);
        ManifestEntry e;
        if (spec.mode == ManifestMode::iemocap) {
          e = write_segment(seg_id, detail::kEmotionTones[c], geom.emotion_means[c]);
          e.categorical = emotion::kClassNames[c];
          std::normal_distribution<double> anoise(0.0, 0.15);
          std::array<float, 3> attrs;
          for (int d = 0; d < 3; ++d)
            attrs[d] = static_cast<float>(
                std::clamp(detail::kAttributeMeans[c][d] + anoise(rng), 1.0, 5.0));
          e.attributes = attrs;
        } else {
          e = write_segment(seg_id, detail::kSentimentTones[c], geom.sentiment_means[c]);
          std::uniform_real_distribution<double> mag(0.5, 3.0);
          e.sentiment = static_cast<float>(mag(rng) * (c == 1 ? 1.0 : -1.0));
        }
        e.session_id = std::string(tag) + "_" + split + "_d" +
                       std::to_string(i / spec.dialogue_length);
        e.split = split;
        m.entries.push_back(std::move(e));
      }
    }
  } else {
    const bool from_mosei = spec.depression_source == ManifestMode::mosei;
    int session_idx = 0;
    for (const char* split : {"train", "dev"}) {
      int per_group = split == std::string("train") ? spec.train_sessions_per_group
                                                    : spec.dev_sessions_per_group;
      for (int group = 0; group <= 1; ++group) {  // 0 healthy, 1 depressed
        for (int k = 0; k < per_group; ++k, ++session_idx) {
          std::uniform_int_distribution<int> slen(spec.segments_per_session_min,
                                                  spec.segments_per_session_max);
          int s_count = slen(rng);
          int n_major = std::max(1, static_cast<int>(std::lround(spec.major_fraction * s_count)));
          std::vector<int> own(s_count, 0);
          for (int i = 0; i < n_major; ++i) own[i] = 1;
          std::shuffle(own.begin(), own.end(), rng);

          std::string session_id = "sess_" + std::string(split) + "_" +
                                   std::to_string(session_idx);
          for (int i = 0; i < s_count; ++i) {
            // family class for this segment: the session's own family for
            // majority slots, the opposite family otherwise
            bool depressed_family = (group == 1) == (own[i] == 1);
            char seg_id[64];
            std::snprintf(seg_id, sizeof seg_id, "%s_%05d", session_id.c_str(), i);
            ManifestEntry e;
            if (from_mosei) {
              int c = depressed_family ? 0 : 1;  // negative vs positive
              e = write_segment(seg_id, detail::kSentimentTones[c], geom.sentiment_means[c]);
            } else {
              // depressed family alternates sad/angry; healthy happy/neutral
              int c = depressed_family ? (i % 2 ? 0 : 2) : (i % 2 ? 3 : 1);
              e = write_segment(seg_id, detail::kEmotionTones[c], geom.emotion_means[c]);
            }
            e.session_id = session_id;
            e.split = split;
            e.depression_label = group;
            m.entries.push_back(std::move(e));
          }
        }
      }
    }
  }

  save_manifest((fs::path(out_dir) / "manifest.jsonl").string(), m);
  // reload to resolve paths and run full validation
  return load_manifest((fs::path(out_dir) / "manifest.jsonl").string());
}

// FNV-1a over the manifest and every referenced data file.
inline std::uint64_t corpus_fingerprint(const std::string& manifest_path) {
  Fnv1a h;
  auto add_file = [&](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw MissingFile("fingerprint: cannot open " + p);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    h.update(bytes.data(), bytes.size());
  };
  add_file(manifest_path);
  Manifest m = load_manifest(manifest_path);
  for (const auto& e : m.entries) {
    if (e.wav_path) add_file(*e.wav_path);
    if (e.embedding_path) add_file(*e.embedding_path);
  }
  return h.digest();
}

}  // namespace emodep::data
