#pragma once

// JSON serialization of experiment reports. Per-seed predictions are stored
// so every aggregate is recomputable from the file alone.

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emodep/depression/train.hpp"
#include "emodep/errors.hpp"
#include "emodep/reference_results.hpp"

namespace emodep::depression {

inline nlohmann::json to_json(const SeedReport& r) {
  nlohmann::json preds = nlohmann::json::array();
  for (const auto& p : r.predictions)
    preds.push_back({{"session", p.session_id},
                     {"probability", p.probability},
                     {"pred", p.pred},
                     {"label", p.label}});
  return {{"seed", r.seed}, {"f1", r.f1}, {"predictions", preds}};
}

inline SeedReport seed_report_from_json(const nlohmann::json& j) {
  SeedReport r;
  r.seed = j.at("seed").get<int>();
  r.f1 = j.at("f1").get<double>();
  for (const auto& p : j.at("predictions")) {
    SessionPrediction sp;
    sp.session_id = p.at("session").get<std::string>();
    sp.probability = p.at("probability").get<double>();
    sp.pred = p.at("pred").get<int>();
    sp.label = p.at("label").get<int>();
    r.predictions.push_back(std::move(sp));
  }
  return r;
}

inline nlohmann::json to_json(const ExperimentReport& r) {
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : r.seeds) seeds.push_back(to_json(s));
  return {{"modality", r.modality},
          {"f1_max", r.f1_max},
          {"f1_avg", r.f1_avg},
          {"f1_std", r.f1_std},
          {"seeds", seeds},
          {"reference", reference::depression_reference_context()}};
}

inline ExperimentReport experiment_report_from_json(const nlohmann::json& j) {
  ExperimentReport r;
  r.modality = j.at("modality").get<std::string>();
  r.f1_max = j.at("f1_max").get<double>();
  r.f1_avg = j.at("f1_avg").get<double>();
  r.f1_std = j.at("f1_std").get<double>();
  for (const auto& s : j.at("seeds")) r.seeds.push_back(seed_report_from_json(s));
  return r;
}

inline void write_experiment_report(const std::string& path, const ExperimentReport& r) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path);
  out << to_json(r).dump(2) << "\n";
}

inline ExperimentReport read_experiment_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("report not found: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("bad report " + path + ": " + e.what());
  }
  return experiment_report_from_json(j);
}

struct FusedSessionVote {
  std::string session_id;
  int audio = 0, text = 0, emotion = 0;
  int fused = 0;
  int label = 0;
};

struct FusedReport {
  int audio_seed = 0, text_seed = 0, emotion_seed = 0;
  std::vector<FusedSessionVote> votes;
  double f1 = 0.0;
};

// Majority-vote fusion of the three modality reports. The voting model per
// modality is its best-dev-F1 seed (lowest seed on ties).
inline FusedReport fuse_reports(const ExperimentReport& audio,
                                const ExperimentReport& text,
                                const ExperimentReport& emotion) {
  auto best_of = [](const ExperimentReport& r) -> const SeedReport& {
    if (r.seeds.empty()) throw InvalidInput("fuse: report '" + r.modality + "' has no seeds");
    const SeedReport* best = &r.seeds.front();
    for (const auto& s : r.seeds)
      if (s.f1 > best->f1) best = &s;
    return *best;
  };
  const SeedReport& a = best_of(audio);
  const SeedReport& t = best_of(text);
  const SeedReport& e = best_of(emotion);

  auto by_id = [](const SeedReport& r) {
    std::map<std::string, const SessionPrediction*> m;
    for (const auto& p : r.predictions) m[p.session_id] = &p;
    return m;
  };
  auto ma = by_id(a), mt = by_id(t), me = by_id(e);
  if (ma.size() != mt.size() || ma.size() != me.size())
    throw InvalidInput("fuse: reports cover different session sets");

  FusedReport fused;
  fused.audio_seed = a.seed;
  fused.text_seed = t.seed;
  fused.emotion_seed = e.seed;
  std::vector<int> preds, labels;
  for (const auto& [id, pa] : ma) {
    auto it = mt.find(id), ie = me.find(id);
    if (it == mt.end() || ie == me.end())
      throw InvalidInput("fuse: session '" + id + "' missing from a report");
    FusedSessionVote v;
    v.session_id = id;
    v.audio = pa->pred;
    v.text = it->second->pred;
    v.emotion = ie->second->pred;
    v.fused = vote_fusion(v.audio, v.text, v.emotion);
    if (pa->label != it->second->label || pa->label != ie->second->label)
      throw InvalidInput("fuse: session '" + id + "' has inconsistent labels across reports");
    v.label = pa->label;
    fused.votes.push_back(v);
    preds.push_back(v.fused);
    labels.push_back(v.label);
  }
  fused.f1 = f1_depressed(preds, labels);
  return fused;
}

inline nlohmann::json to_json(const FusedReport& r) {
  nlohmann::json votes = nlohmann::json::array();
  for (const auto& v : r.votes)
    votes.push_back({{"session", v.session_id},
                     {"audio", v.audio},
                     {"text", v.text},
                     {"emotion", v.emotion},
                     {"fused", v.fused},
                     {"label", v.label}});
  return {{"f1", r.f1},
          {"audio_seed", r.audio_seed},
          {"text_seed", r.text_seed},
          {"emotion_seed", r.emotion_seed},
          {"votes", votes},
          {"reference", reference::depression_reference_context()}};
}

inline void write_fused_report(const std::string& path, const FusedReport& r) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write fused report: " + path);
  out << to_json(r).dump(2) << "\n";
}

}  // namespace emodep::depression
