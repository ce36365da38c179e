#pragma once

// Published reference results on the licensed corpora (IEMOCAP, CMU-MOSEI,
// DAIC-WOZ). Surfaced in reports as context only: synthetic-corpus runs are
// not comparable, so nothing here is ever asserted against.

#include <nlohmann/json.hpp>

namespace emodep::reference {

// Emotion recognition, IEMOCAP (4-class + attribute regression).
struct IemocapRef {
  const char* modality;
  double wa, ua, mae_v, mae_a, mae_d;
};
inline constexpr IemocapRef kIemocapPretrain[] = {
    {"a", 0.6488, 0.6656, 0.6182, 0.4729, 0.6225},
    {"t", 0.7326, 0.7350, 0.4848, 0.5113, 0.6161},
    {"at", 0.7718, 0.7787, 0.4501, 0.4404, 0.559},
};

// Sentiment classification, CMU-MOSEI.
struct MoseiRef {
  const char* modality;
  double acc2, f1;
};
inline constexpr MoseiRef kMoseiPretrain[] = {
    {"a", 0.7239, 0.8060},
    {"t", 0.7909, 0.8314},
    {"at", 0.7953, 0.8361},
};

// Depression detection on DAIC-WOZ with emotion features, 20 seeds.
struct DepressionRef {
  const char* source;  // pretraining dataset of the extractor
  const char* modality;
  double f1_max, f1_avg, f1_std;
};
inline constexpr DepressionRef kEmotionFeatureDetection[] = {
    {"iemocap", "a", 0.558, 0.529, 0.018},
    {"iemocap", "t", 0.621, 0.562, 0.022},
    {"iemocap", "at", 0.600, 0.554, 0.025},
    {"mosei", "a", 0.558, 0.534, 0.014},
    {"mosei", "t", 0.750, 0.718, 0.018},
    {"mosei", "at", 0.828, 0.771, 0.027},
};

// Three-modality comparison and the voting-fusion result.
inline constexpr DepressionRef kModalityDetection[] = {
    {"direct", "audio", 0.696, 0.608, 0.033},
    {"direct", "text", 0.727, 0.600, 0.070},
    {"mosei", "emotion", 0.828, 0.771, 0.027},
};
inline constexpr double kFusedF1 = 0.869;

inline nlohmann::json depression_reference_context() {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : kModalityDetection)
    rows.push_back({{"source", r.source},
                    {"modality", r.modality},
                    {"f1_max", r.f1_max},
                    {"f1_avg", r.f1_avg},
                    {"f1_std", r.f1_std}});
  return {
      {"note",
       "published DAIC-WOZ reference results; synthetic-corpus runs are not comparable"},
      {"modalities", rows},
      {"fused_f1", kFusedF1},
  };
}

}  // namespace emodep::reference
