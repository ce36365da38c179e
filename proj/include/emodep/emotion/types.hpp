#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "emodep/dsp/features.hpp"
#include "emodep/errors.hpp"

namespace emodep::emotion {

inline constexpr int kNumClasses = 4;
inline constexpr int kEmbeddingDim = 768;
inline constexpr int kContextWindow = 7;  // utterances t-3 .. t+3
inline constexpr int kNumAttributes = 3;  // valence, activation, dominance

enum class Mode { iemocap, mosei };
enum class Modality { audio, text, audio_text };

inline const char* kClassNames[kNumClasses] = {"angry", "happy", "sad", "neutral"};

inline std::string to_string(Mode m) { return m == Mode::iemocap ? "iemocap" : "mosei"; }

inline std::string to_string(Modality m) {
  switch (m) {
    case Modality::audio: return "a";
    case Modality::text: return "t";
    default: return "at";
  }
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "iemocap") return Mode::iemocap;
  if (s == "mosei") return Mode::mosei;
  throw InvalidInput("unknown mode '" + s + "', want iemocap|mosei");
}

inline Modality modality_from_string(const std::string& s) {
  if (s == "a" || s == "audio") return Modality::audio;
  if (s == "t" || s == "text") return Modality::text;
  if (s == "at" || s == "a+t") return Modality::audio_text;
  throw InvalidInput("unknown modality '" + s + "', want a|t|at");
}

inline bool uses_audio(Modality m) { return m != Modality::text; }
inline bool uses_text(Modality m) { return m != Modality::audio; }

// "excited" folds into "happy" at ingestion.
inline int class_from_string(const std::string& s) {
  if (s == "angry") return 0;
  if (s == "happy" || s == "excited") return 1;
  if (s == "sad") return 2;
  if (s == "neutral") return 3;
  throw LabelInconsistent("unknown categorical label '" + s + "'");
}

// One labeled utterance. The context holds the 768-d embeddings of utterances
// t-3..t+3, edge-replicated at dialogue boundaries, row-major 7x768.
struct EmotionSegment {
  std::string id;
  std::optional<dsp::FeatureMatrix> audio;        // T x 80
  std::optional<std::vector<float>> context;      // 7*768
  std::optional<int> label;                       // class index, iemocap mode
  std::optional<std::array<float, 3>> attributes; // (v, a, d) in [1, 5]
  std::optional<float> sentiment;                 // [-3, 3] \ {0}, mosei mode
};

// Builds the 7x768 context window around position t of a dialogue, clamping
// indices at the boundaries.
inline std::vector<float> context_window(const std::vector<const std::vector<float>*>& embeddings,
                                         int t) {
  const int n = static_cast<int>(embeddings.size());
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(kContextWindow) * kEmbeddingDim);
  for (int off = -3; off <= 3; ++off) {
    int idx = std::clamp(t + off, 0, n - 1);
    const auto& e = *embeddings[idx];
    if (static_cast<int>(e.size()) != kEmbeddingDim)
      throw ShapeError("embedding has dim " + std::to_string(e.size()) +
                       ", want " + std::to_string(kEmbeddingDim));
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

}  // namespace emodep::emotion
