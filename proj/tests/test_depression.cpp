#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "emodep/depression/model.hpp"
#include "emodep/depression/report.hpp"
#include "emodep/depression/train.hpp"
#include "test_util.hpp"

using namespace emodep;
using namespace emodep::depression;
using Catch::Approx;

namespace {

// Sessions whose feature rows cluster around +mu (depressed) or -mu (healthy).
std::vector<SessionData> clustered_sessions(int per_group, int dim, std::uint64_t seed,
                                            const std::string& prefix) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.1);
  std::uniform_int_distribution<int> slen(4, 7);
  std::vector<SessionData> out;
  for (int group = 0; group <= 1; ++group)
    for (int k = 0; k < per_group; ++k) {
      SessionData s;
      s.id = prefix + "_" + std::to_string(group) + "_" + std::to_string(k);
      s.label = group;
      s.features.rows = slen(rng);
      s.features.cols = dim;
      for (int t = 0; t < s.features.rows; ++t)
        for (int d = 0; d < dim; ++d)
          s.features.values.push_back(
              static_cast<float>((group == 1 ? 1.0 : -1.0) * (d % 3 == 0) + g(rng)));
      out.push_back(std::move(s));
    }
  return out;
}

}  // namespace

TEST_CASE("audio summary is mean plus population std per column") {
  dsp::FeatureMatrix m;
  m.rows = 4;
  m.cols = dsp::kFeatureDim;
  m.values.assign(static_cast<std::size_t>(m.rows) * m.cols, 0.0f);
  // column 0 takes values 1, 3, 5, 7: mean 4, population std sqrt(5)
  for (int t = 0; t < 4; ++t) m.at(t, 0) = static_cast<float>(2 * t + 1);
  // column 1 is constant
  for (int t = 0; t < 4; ++t) m.at(t, 1) = 2.5f;

  auto s = audio_summary(m);
  REQUIRE(s.size() == 160);
  CHECK(s[0] == Approx(4.0));
  CHECK(s[80] == Approx(std::sqrt(5.0)));
  CHECK(s[1] == Approx(2.5));
  CHECK(s[81] == Approx(0.0));
}

TEST_CASE("session features demand the right modality") {
  emotion::EmotionSegment no_audio;
  no_audio.id = "x";
  CHECK_THROWS_AS(audio_session_features({no_audio}), ModalityMismatch);
  CHECK_THROWS_AS(text_session_features({no_audio}), ModalityMismatch);
  CHECK_THROWS_AS(audio_session_features({}), EmptySession);
}

TEST_CASE("session classifier outputs live strictly inside (0, 1)") {
  std::mt19937_64 rng(61);
  auto model = SessionClassifier<float>::init(CellKind::lstm, 16, 5);
  std::normal_distribution<double> g(0.0, 1.0);
  transfer::FeatureSeq f;
  f.rows = 6;
  f.cols = 16;
  for (int i = 0; i < 96; ++i) f.values.push_back(static_cast<float>(g(rng)));
  double p = model.probability(f);
  CHECK(p > 0.0);
  CHECK(p < 1.0);

  // zero weights -> sigmoid(0) = 0.5 regardless of input
  for (auto&& [name, t] : model.named_params())
    std::fill(t.value().begin(), t.value().end(), 0.0f);
  CHECK(model.probability(f) == Approx(0.5));

  // single-segment session still works
  transfer::FeatureSeq one;
  one.rows = 1;
  one.cols = 16;
  one.values.assign(16, 0.3f);
  auto gru = SessionClassifier<float>::init(CellKind::gru, 16, 6);
  double q = gru.probability(one);
  CHECK(q > 0.0);
  CHECK(q < 1.0);
}

TEST_CASE("f1 of the depressed class matches its examples") {
  CHECK(f1_depressed({1, 1, 0, 0}, {1, 1, 0, 0}) == 1.0);
  CHECK(f1_depressed({1, 1, 1, 1}, {1, 0, 1, 0}) == Approx(2.0 / 3.0));
  CHECK(f1_depressed({0, 0, 0}, {0, 0, 0}) == 0.0);
  CHECK_THROWS_AS(f1_depressed({1}, {1, 0}), ShapeError);
}

TEST_CASE("vote_fusion satisfies the full majority truth table") {
  CHECK(vote_fusion(0, 0, 0) == 0);
  CHECK(vote_fusion(0, 0, 1) == 0);
  CHECK(vote_fusion(0, 1, 0) == 0);
  CHECK(vote_fusion(1, 0, 0) == 0);
  CHECK(vote_fusion(0, 1, 1) == 1);
  CHECK(vote_fusion(1, 0, 1) == 1);
  CHECK(vote_fusion(1, 1, 0) == 1);
  CHECK(vote_fusion(1, 1, 1) == 1);
}

TEST_CASE("aggregate_f1 reproduces the hand-computed population statistics") {
  auto a = aggregate_f1({0.5, 0.7, 0.9});
  CHECK(a.max == Approx(0.9));
  CHECK(a.avg == Approx(0.7));
  CHECK(a.std_dev == Approx(0.16329931618554522).margin(1e-9));

  auto single = aggregate_f1({0.42});
  CHECK(single.max == single.avg);
  CHECK(single.std_dev == 0.0);

  // permutation invariance
  auto b = aggregate_f1({0.9, 0.5, 0.7});
  CHECK(b.max == a.max);
  CHECK(b.avg == Approx(a.avg));
  CHECK(b.std_dev == Approx(a.std_dev));

  // equal values iff zero spread
  auto c = aggregate_f1({0.6, 0.6, 0.6});
  CHECK(c.std_dev == Approx(0.0).margin(1e-15));
}

TEST_CASE("train_depression is deterministic and validates its split") {
  auto train = clustered_sessions(4, 12, 71, "tr");
  auto dev = clustered_sessions(2, 12, 72, "dv");

  DepressionTrainConfig cfg;
  cfg.epochs = 4;
  cfg.patience = 4;

  auto r1 = train_depression<float>(CellKind::lstm, train, dev, 3, cfg);
  auto r2 = train_depression<float>(CellKind::lstm, train, dev, 3, cfg);
  CHECK(r1.report.f1 == r2.report.f1);
  REQUIRE(r1.report.predictions.size() == r2.report.predictions.size());
  for (std::size_t i = 0; i < r1.report.predictions.size(); ++i) {
    CHECK(r1.report.predictions[i].probability == r2.report.predictions[i].probability);
    CHECK(r1.report.predictions[i].pred == r2.report.predictions[i].pred);
  }

  // all-healthy training split
  std::vector<SessionData> healthy_only;
  for (auto& s : train)
    if (s.label == 0) healthy_only.push_back(s);
  CHECK_THROWS_AS(train_depression<float>(CellKind::lstm, healthy_only, dev, 0, cfg),
                  DegenerateSplit);
}

TEST_CASE("multi_seed_protocol aggregates and parallel workers change nothing") {
  auto train = clustered_sessions(4, 10, 73, "tr");
  auto dev = clustered_sessions(2, 10, 74, "dv");
  DepressionTrainConfig cfg;
  cfg.epochs = 3;
  cfg.patience = 3;

  auto serial = multi_seed_protocol(CellKind::gru, train, dev, 4, cfg, "audio", 1);
  REQUIRE(serial.seeds.size() == 4);
  CHECK(serial.f1_max >= serial.f1_avg);
  CHECK(serial.f1_std >= 0.0);
  std::vector<double> f1s;
  for (auto& s : serial.seeds) f1s.push_back(s.f1);
  auto agg = aggregate_f1(f1s);
  CHECK(serial.f1_max == Approx(agg.max));
  CHECK(serial.f1_avg == Approx(agg.avg));
  CHECK(serial.f1_std == Approx(agg.std_dev));

  auto parallel = multi_seed_protocol(CellKind::gru, train, dev, 4, cfg, "audio", 2);
  for (int s = 0; s < 4; ++s) CHECK(parallel.seeds[s].f1 == serial.seeds[s].f1);

  CHECK_THROWS_AS(multi_seed_protocol(CellKind::gru, train, dev, 0, cfg, "audio", 1),
                  InvalidInput);
}

TEST_CASE("training errors propagate with the seed attached") {
  auto dev = clustered_sessions(2, 10, 75, "dv");
  std::vector<SessionData> bad;  // empty training set
  DepressionTrainConfig cfg;
  try {
    multi_seed_protocol(CellKind::lstm, bad, dev, 2, cfg, "text", 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == "empty_dataset");
    CHECK(std::string(e.what()).find("seed 0") != std::string::npos);
  }
}

TEST_CASE("experiment reports round-trip through JSON with recomputable f1") {
  TempDir tmp("rep");
  auto train = clustered_sessions(3, 8, 76, "tr");
  auto dev = clustered_sessions(2, 8, 77, "dv");
  DepressionTrainConfig cfg;
  cfg.epochs = 2;
  cfg.patience = 2;
  auto rep = multi_seed_protocol(CellKind::lstm, train, dev, 2, cfg, "emotion", 1);

  std::string path = tmp.str("emotion.json");
  write_experiment_report(path, rep);
  auto back = read_experiment_report(path);
  CHECK(back.modality == "emotion");
  CHECK(back.f1_max == rep.f1_max);
  CHECK(back.f1_avg == rep.f1_avg);
  CHECK(back.f1_std == rep.f1_std);
  REQUIRE(back.seeds.size() == rep.seeds.size());

  // stored predictions reproduce the stored f1
  for (const auto& s : back.seeds) {
    std::vector<int> p, l;
    for (const auto& q : s.predictions) {
      p.push_back(q.pred);
      l.push_back(q.label);
    }
    CHECK(f1_depressed(p, l) == Approx(s.f1));
  }
}

TEST_CASE("fuse_reports majority-votes the best seed per modality") {
  auto mk = [](const std::string& modality, std::vector<int> preds,
               std::vector<int> labels, double f1_tag) {
    ExperimentReport r;
    r.modality = modality;
    SeedReport weak;  // a decoy seed with lower f1
    weak.seed = 0;
    weak.f1 = -1.0;
    SeedReport s;
    s.seed = 1;
    s.f1 = f1_tag;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      SessionPrediction p;
      p.session_id = "s" + std::to_string(i);
      p.pred = preds[i];
      p.label = labels[i];
      weak.predictions.push_back(p);
      s.predictions.push_back(p);
    }
    r.seeds = {weak, s};
    r.f1_max = f1_tag;
    return r;
  };
  std::vector<int> labels = {1, 1, 0, 0};
  auto ra = mk("audio", {1, 0, 0, 1}, labels, 0.5);
  auto rt = mk("text", {1, 1, 0, 1}, labels, 0.6);
  auto re = mk("emotion", {1, 1, 0, 0}, labels, 0.9);

  auto fused = fuse_reports(ra, rt, re);
  CHECK(fused.emotion_seed == 1);
  REQUIRE(fused.votes.size() == 4);
  // per-session majorities: (1,1,1)->1, (0,1,1)->1, (0,0,0)->0, (1,1,0)->1
  std::map<std::string, int> want = {{"s0", 1}, {"s1", 1}, {"s2", 0}, {"s3", 1}};
  for (const auto& v : fused.votes) CHECK(v.fused == want[v.session_id]);
  CHECK(fused.f1 == Approx(f1_depressed({1, 1, 0, 1}, labels)));

  // mismatched session sets are rejected
  auto rshort = mk("emotion", {1, 1, 0}, {1, 1, 0}, 0.9);
  CHECK_THROWS_AS(fuse_reports(ra, rt, rshort), InvalidInput);
}
