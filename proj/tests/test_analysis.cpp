#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>

#include "emodep/analysis/profile.hpp"
#include "test_util.hpp"

using namespace emodep;
using namespace emodep::analysis;
using Catch::Approx;

namespace {

emotion::EmotionSegment text_segment(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  emotion::EmotionSegment seg;
  seg.id = "seg" + std::to_string(seed);
  std::vector<float> ctx(emotion::kContextWindow * emotion::kEmbeddingDim);
  for (auto& v : ctx) v = static_cast<float>(g(rng));
  seg.context = std::move(ctx);
  return seg;
}

std::vector<data::DepressionSession> make_sessions(int per_group, int segs_per_session,
                                                   std::uint64_t seed) {
  std::vector<data::DepressionSession> out;
  std::uint64_t k = seed;
  for (int group = 0; group <= 1; ++group)
    for (int i = 0; i < per_group; ++i) {
      data::DepressionSession s;
      s.id = "s" + std::to_string(group) + "_" + std::to_string(i);
      s.label = group;
      s.split = "train";
      for (int j = 0; j < segs_per_session; ++j) s.segments.push_back(text_segment(k++));
      out.push_back(std::move(s));
    }
  return out;
}

emotion::EmotionModel<float> zeroed_model(emotion::Mode mode) {
  auto m = emotion::EmotionModel<float>::init(mode, emotion::Modality::text, 1);
  for (auto&& [name, t] : m.named_params())
    std::fill(t.value().begin(), t.value().end(), 0.0f);
  return m;
}

}  // namespace

TEST_CASE("constant uniform logits average to 0.25 per class") {
  auto model = zeroed_model(emotion::Mode::iemocap);
  auto sessions = make_sessions(2, 3, 100);
  auto rows = categorical_distribution(model, sessions);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    REQUIRE(r.categorical_means.has_value());
    for (double v : *r.categorical_means) CHECK(v == Approx(0.25));
  }
}

TEST_CASE("probability rows normalize and decompose over groups") {
  auto model = emotion::EmotionModel<float>::init(emotion::Mode::iemocap,
                                                  emotion::Modality::text, 5);
  auto sessions = make_sessions(3, 4, 200);
  auto rows = categorical_distribution(model, sessions);
  REQUIRE(rows.size() == 3);

  const AnalysisTable *dep = nullptr, *healthy = nullptr, *all = nullptr;
  for (const auto& r : rows) {
    double sum = 0.0;
    for (double v : *r.categorical_means) sum += v;
    CHECK(sum == Approx(1.0).epsilon(1e-6));
    if (r.group == "depressed") dep = &r;
    if (r.group == "healthy") healthy = &r;
    if (r.group == "all") all = &r;
  }
  REQUIRE((dep && healthy && all));
  CHECK(all->sample_count == dep->sample_count + healthy->sample_count);
  for (int c = 0; c < 4; ++c) {
    double weighted = ((*dep->categorical_means)[c] * dep->sample_count +
                       (*healthy->categorical_means)[c] * healthy->sample_count) /
                      all->sample_count;
    CHECK((*all->categorical_means)[c] == Approx(weighted).margin(1e-9));
  }
}

TEST_CASE("a single-segment group reports that segment's probabilities") {
  auto model = emotion::EmotionModel<float>::init(emotion::Mode::iemocap,
                                                  emotion::Modality::text, 6);
  std::vector<data::DepressionSession> sessions;
  data::DepressionSession d;
  d.id = "dep";
  d.label = 1;
  d.segments.push_back(text_segment(1));
  sessions.push_back(d);
  data::DepressionSession h;
  h.id = "ok";
  h.label = 0;
  h.segments.push_back(text_segment(2));
  sessions.push_back(h);

  auto rows = categorical_distribution(model, sessions);
  auto pred = model.forward(sessions[0].segments[0]);
  const auto& logits = pred.class_logits->value();
  double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  std::array<double, 4> p{};
  for (int c = 0; c < 4; ++c) {
    p[c] = std::exp(logits[c] - mx);
    sum += p[c];
  }
  for (auto& v : p) v /= sum;
  REQUIRE(rows[0].group == "depressed");
  for (int c = 0; c < 4; ++c)
    CHECK((*rows[0].categorical_means)[c] == Approx(p[c]).margin(1e-9));
}

TEST_CASE("attribute means are clamped into [1, 5]") {
  auto model = zeroed_model(emotion::Mode::iemocap);
  // constant predictor (3, 3, 3)
  model.attr_b.value() = {3.0f, 3.0f, 3.0f};
  auto sessions = make_sessions(2, 2, 300);
  auto rows = attribute_profile(model, sessions);
  for (const auto& r : rows)
    for (double v : *r.attribute_means) CHECK(v == Approx(3.0));

  // raw prediction 6.2 contributes 5.0 after clamping
  model.attr_b.value() = {6.2f, 0.5f, 2.0f};
  rows = attribute_profile(model, sessions);
  for (const auto& r : rows) {
    CHECK((*r.attribute_means)[0] == Approx(5.0));
    CHECK((*r.attribute_means)[1] == Approx(1.0));
    CHECK((*r.attribute_means)[2] == Approx(2.0));
  }
}

TEST_CASE("zero-logit sentiment model reports (0.5, 0.5) and rows complement") {
  auto model = zeroed_model(emotion::Mode::mosei);
  auto sessions = make_sessions(2, 3, 400);
  auto rows = sentiment_profile(model, sessions);
  for (const auto& r : rows) {
    CHECK((*r.sentiment_means)[0] == Approx(0.5));
    CHECK((*r.sentiment_means)[1] == Approx(0.5));
  }

  auto random_model = emotion::EmotionModel<float>::init(emotion::Mode::mosei,
                                                         emotion::Modality::text, 7);
  rows = sentiment_profile(random_model, sessions);
  for (const auto& r : rows)
    CHECK((*r.sentiment_means)[0] + (*r.sentiment_means)[1] == Approx(1.0).margin(1e-9));
}

TEST_CASE("group means are invariant to session order") {
  auto model = emotion::EmotionModel<float>::init(emotion::Mode::iemocap,
                                                  emotion::Modality::text, 8);
  auto sessions = make_sessions(3, 3, 500);
  auto rows1 = categorical_distribution(model, sessions);
  std::reverse(sessions.begin(), sessions.end());
  auto rows2 = categorical_distribution(model, sessions);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 4; ++c)
      CHECK((*rows1[i].categorical_means)[c] ==
            Approx((*rows2[i].categorical_means)[c]).margin(1e-12));
}

TEST_CASE("mode and group mismatches are rejected") {
  auto iemocap = zeroed_model(emotion::Mode::iemocap);
  auto mosei = zeroed_model(emotion::Mode::mosei);
  auto sessions = make_sessions(2, 2, 600);
  CHECK_THROWS_AS(sentiment_profile(iemocap, sessions), ModalityMismatch);
  CHECK_THROWS_AS(categorical_distribution(mosei, sessions), ModalityMismatch);
  CHECK_THROWS_AS(attribute_profile(mosei, sessions), ModalityMismatch);

  // all sessions depressed -> the healthy group is empty
  std::vector<data::DepressionSession> dep_only(sessions.begin() + 2, sessions.end());
  CHECK_THROWS_AS(categorical_distribution(iemocap, dep_only), EmptyGroup);
}

TEST_CASE("per-session averaging coincides with per-segment on equal-size sessions") {
  auto model = emotion::EmotionModel<float>::init(emotion::Mode::iemocap,
                                                  emotion::Modality::text, 9);
  auto sessions = make_sessions(2, 4, 700);  // every session has 4 segments
  auto seg_rows = categorical_distribution(model, sessions, {false});
  auto sess_rows = categorical_distribution(model, sessions, {true});
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 4; ++c)
      CHECK((*seg_rows[i].categorical_means)[c] ==
            Approx((*sess_rows[i].categorical_means)[c]).margin(1e-9));
}

TEST_CASE("emit_report writes deterministic files that parse back exactly") {
  TempDir tmp("analysis");
  auto model = emotion::EmotionModel<float>::init(emotion::Mode::iemocap,
                                                  emotion::Modality::text, 10);
  auto sessions = make_sessions(2, 3, 800);
  auto tables = categorical_distribution(model, sessions);
  auto attr = attribute_profile(model, sessions);
  tables.insert(tables.end(), attr.begin(), attr.end());

  auto files1 = emit_report(tables, tmp.str("out1"));
  REQUIRE(files1.size() == 3);  // categorical.csv, attributes.csv, analysis.json

  auto rows = parse_report_csv(tmp.str("out1/categorical.csv"));
  REQUIRE(rows.size() == 12);  // 3 groups x 4 classes
  for (const auto& r : rows) {
    const AnalysisTable* src = nullptr;
    for (const auto& t : tables)
      if (t.group == r.group && t.categorical_means) src = &t;
    REQUIRE(src != nullptr);
    static const char* names[4] = {"angry", "happy", "sad", "neutral"};
    for (int c = 0; c < 4; ++c)
      if (r.measure == names[c])
        CHECK(r.value == Approx((*src->categorical_means)[c]).margin(1e-9));
  }

  auto files2 = emit_report(tables, tmp.str("out2"));
  for (std::size_t i = 0; i < files1.size(); ++i) {
    std::ifstream a(files1[i], std::ios::binary), b(files2[i], std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
  }

  CHECK_THROWS_AS(emit_report({}, tmp.str("out3")), InvalidInput);
}
