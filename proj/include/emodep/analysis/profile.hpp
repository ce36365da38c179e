#pragma once

// Emotion-content analysis of depression sessions: run every segment through
// a trained emotion model and average the outputs per group (depressed,
// healthy, all). Averages are over segments ("one utterance, one sample");
// --per-session first averages within each session and then across sessions.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emodep/data/dataset.hpp"
#include "emodep/emotion/model.hpp"
#include "emodep/errors.hpp"

namespace emodep::analysis {

struct AnalysisTable {
  std::string group;     // depressed | healthy | all
  std::string modality;  // a | t | at
  long sample_count = 0;
  std::optional<std::array<double, 4>> categorical_means;  // sums to 1
  std::optional<std::array<double, 3>> attribute_means;    // clamped to [1, 5]
  std::optional<std::array<double, 2>> sentiment_means;    // {neg, pos}, sums to 1
};

struct AnalysisOptions {
  bool per_session = false;
};

namespace detail {

template <std::size_t N>
struct GroupAccum {
  std::array<double, N> sum{};
  long count = 0;

  void add(const std::array<double, N>& v, double weight = 1.0) {
    for (std::size_t i = 0; i < N; ++i) sum[i] += weight * v[i];
    ++count;
  }
  std::array<double, N> mean() const {
    std::array<double, N> m{};
    for (std::size_t i = 0; i < N; ++i) m[i] = sum[i] / static_cast<double>(count);
    return m;
  }
};

// Per-segment model outputs mapped to the analysis quantity, then averaged
// per group. The "all" row is recomputed from the same per-sample stream, so
// the weighted-mean decomposition over groups holds by construction.
template <std::size_t N, class SegmentFn>
std::vector<AnalysisTable> group_profile(const std::vector<data::DepressionSession>& sessions,
                                         const std::string& modality,
                                         const AnalysisOptions& opt, SegmentFn fn,
                                         void (*assign)(AnalysisTable&, const std::array<double, N>&)) {
  GroupAccum<N> groups[3];  // 0 healthy, 1 depressed, 2 all
  for (const auto& s : sessions) {
    if (s.segments.empty()) throw EmptySession("analysis: session '" + s.id + "' is empty");
    if (opt.per_session) {
      GroupAccum<N> within;
      for (const auto& seg : s.segments) within.add(fn(seg));
      groups[s.label].add(within.mean());
      groups[2].add(within.mean());
    } else {
      for (const auto& seg : s.segments) {
        auto v = fn(seg);
        groups[s.label].add(v);
        groups[2].add(v);
      }
    }
  }
  const char* names[3] = {"healthy", "depressed", "all"};
  std::vector<AnalysisTable> rows;
  for (int g : {1, 0, 2}) {  // depressed, healthy, all
    if (groups[g].count == 0)
      throw EmptyGroup("analysis: group '" + std::string(names[g]) + "' has no samples");
    AnalysisTable row;
    row.group = names[g];
    row.modality = modality;
    row.sample_count = groups[g].count;
    assign(row, groups[g].mean());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

// Mean softmax class probabilities per group (iemocap-mode models only).
inline std::vector<AnalysisTable> categorical_distribution(
    const emotion::EmotionModel<float>& model,
    const std::vector<data::DepressionSession>& sessions, const AnalysisOptions& opt = {}) {
  if (model.mode != emotion::Mode::iemocap)
    throw ModalityMismatch("categorical distribution needs an iemocap-mode model");
  auto fn = [&](const emotion::EmotionSegment& seg) {
    auto pred = model.forward(seg);
    const auto& logits = pred.class_logits->value();
    std::array<double, 4> p{};
    double mx = logits[0];
    for (int c = 1; c < 4; ++c) mx = std::max(mx, static_cast<double>(logits[c]));
    double sum = 0.0;
    for (int c = 0; c < 4; ++c) {
      p[c] = std::exp(static_cast<double>(logits[c]) - mx);
      sum += p[c];
    }
    for (int c = 0; c < 4; ++c) p[c] /= sum;
    return p;
  };
  return detail::group_profile<4>(
      sessions, emotion::to_string(model.modality), opt, fn,
      +[](AnalysisTable& row, const std::array<double, 4>& m) { row.categorical_means = m; });
}

// Mean predicted (valence, activation, dominance) per group, with raw
// regressor outputs clamped to the [1, 5] annotation scale.
inline std::vector<AnalysisTable> attribute_profile(
    const emotion::EmotionModel<float>& model,
    const std::vector<data::DepressionSession>& sessions, const AnalysisOptions& opt = {}) {
  if (model.mode != emotion::Mode::iemocap)
    throw ModalityMismatch("attribute profile needs an iemocap-mode model");
  auto fn = [&](const emotion::EmotionSegment& seg) {
    auto pred = model.forward(seg);
    const auto& a = pred.attribute_preds->value();
    std::array<double, 3> v{};
    for (int d = 0; d < 3; ++d) v[d] = std::clamp(static_cast<double>(a[d]), 1.0, 5.0);
    return v;
  };
  return detail::group_profile<3>(
      sessions, emotion::to_string(model.modality), opt, fn,
      +[](AnalysisTable& row, const std::array<double, 3>& m) { row.attribute_means = m; });
}

// Mean (negative, positive) sentiment probability per group (mosei-mode).
inline std::vector<AnalysisTable> sentiment_profile(
    const emotion::EmotionModel<float>& model,
    const std::vector<data::DepressionSession>& sessions, const AnalysisOptions& opt = {}) {
  if (model.mode != emotion::Mode::mosei)
    throw ModalityMismatch("sentiment profile needs a mosei-mode model");
  auto fn = [&](const emotion::EmotionSegment& seg) {
    auto pred = model.forward(seg);
    double x = pred.sentiment_logit->value()[0];
    double pos = 1.0 / (1.0 + std::exp(-x));
    return std::array<double, 2>{1.0 - pos, pos};
  };
  return detail::group_profile<2>(
      sessions, emotion::to_string(model.modality), opt, fn,
      +[](AnalysisTable& row, const std::array<double, 2>& m) { row.sentiment_means = m; });
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// One CSV per analysis kind (long format) plus a combined analysis.json.
// Output bytes are deterministic for identical inputs.
inline std::vector<std::string> emit_report(const std::vector<AnalysisTable>& tables,
                                            const std::string& out_dir) {
  if (tables.empty()) throw InvalidInput("emit_report: no analysis tables");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  static const char* kCatNames[4] = {"angry", "happy", "sad", "neutral"};
  static const char* kAttrNames[3] = {"valence", "activation", "dominance"};
  static const char* kSentNames[2] = {"negative", "positive"};

  std::vector<std::string> written;
  auto open_csv = [&](const std::string& name) {
    std::string path = (fs::path(out_dir) / name).string();
    auto out = std::make_shared<std::ofstream>(path);
    if (!*out) throw IoError("cannot write " + path);
    *out << "table,group,modality,measure,value,sample_count\n";
    written.push_back(path);
    return out;
  };

  std::shared_ptr<std::ofstream> cat, attr, sent;
  nlohmann::json combined = nlohmann::json::array();
  for (const auto& t : tables) {
    nlohmann::json row{{"group", t.group},
                       {"modality", t.modality},
                       {"sample_count", t.sample_count}};
    if (t.categorical_means) {
      if (!cat) cat = open_csv("categorical.csv");
      for (int c = 0; c < 4; ++c)
        *cat << "categorical," << t.group << "," << t.modality << "," << kCatNames[c]
             << "," << detail::fmt_double((*t.categorical_means)[c]) << ","
             << t.sample_count << "\n";
      row["categorical_means"] = *t.categorical_means;
    }
    if (t.attribute_means) {
      if (!attr) attr = open_csv("attributes.csv");
      for (int d = 0; d < 3; ++d)
        *attr << "attributes," << t.group << "," << t.modality << "," << kAttrNames[d]
              << "," << detail::fmt_double((*t.attribute_means)[d]) << ","
              << t.sample_count << "\n";
      row["attribute_means"] = *t.attribute_means;
    }
    if (t.sentiment_means) {
      if (!sent) sent = open_csv("sentiment.csv");
      for (int d = 0; d < 2; ++d)
        *sent << "sentiment," << t.group << "," << t.modality << "," << kSentNames[d]
              << "," << detail::fmt_double((*t.sentiment_means)[d]) << ","
              << t.sample_count << "\n";
      row["sentiment_means"] = *t.sentiment_means;
    }
    combined.push_back(std::move(row));
  }
  std::string json_path = (fs::path(out_dir) / "analysis.json").string();
  std::ofstream jout(json_path);
  if (!jout) throw IoError("cannot write " + json_path);
  jout << combined.dump(2) << "\n";
  written.push_back(json_path);
  return written;
}

// Parses a CSV produced by emit_report back into (table, group, modality,
// measure, value, count) tuples; used by tests and downstream tooling.
struct CsvRow {
  std::string table, group, modality, measure;
  double value = 0.0;
  long sample_count = 0;
};

inline std::vector<CsvRow> parse_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("csv not found: " + path);
  std::vector<CsvRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    CsvRow r;
    std::size_t pos = 0;
    auto next = [&]() {
      std::size_t c = line.find(',', pos);
      std::string f = c == std::string::npos ? line.substr(pos) : line.substr(pos, c - pos);
      pos = c == std::string::npos ? line.size() : c + 1;
      return f;
    };
    r.table = next();
    r.group = next();
    r.modality = next();
    r.measure = next();
    r.value = std::stod(next());
    r.sample_count = std::stol(next());
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace emodep::analysis
