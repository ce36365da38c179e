#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>

#include "emodep/data/dataset.hpp"
#include "emodep/data/embedding_io.hpp"
#include "emodep/data/manifest.hpp"
#include "emodep/dsp/wav.hpp"
#include "test_util.hpp"

using namespace emodep;
using namespace emodep::data;
using Catch::Approx;

namespace {

// Writes a small valid corpus (wav + embedding per segment) and returns the
// manifest path. Embedding i is the constant vector i+1.
struct MiniCorpus {
  TempDir tmp{"manifest"};
  std::string manifest_path;

  MiniCorpus(ManifestMode mode, int n_segments, const std::string& extra_line = "") {
    std::ofstream out(tmp.str("manifest.jsonl"));
    out << R"({"schema_version":1,"mode":")" << to_string(mode) << R"("})" << "\n";
    for (int i = 0; i < n_segments; ++i) {
      dsp::AudioClip clip;
      clip.id = "seg" + std::to_string(i);
      clip.samples.assign(4800, 0);
      for (int t = 0; t < 4800; ++t)
        clip.samples[t] = static_cast<std::int16_t>(
            3000.0 * std::sin(2.0 * M_PI * 500.0 * t / 16000.0));
      dsp::write_wav(tmp.str("seg" + std::to_string(i) + ".wav"), clip);
      save_embedding(tmp.str("seg" + std::to_string(i) + ".f32"),
                     std::vector<float>(768, static_cast<float>(i + 1)));
      out << R"({"segment_id":"seg)" << i << R"(","session_id":"sess0",)"
          << R"("wav":"seg)" << i << R"(.wav","embedding":"seg)" << i << R"(.f32",)";
      if (mode == ManifestMode::iemocap)
        out << R"("categorical":"happy","attributes":[3.0,3.0,3.0],)";
      if (mode == ManifestMode::mosei) out << R"("sentiment":1.5,)";
      if (mode == ManifestMode::depression) out << R"("depression_label":1,)";
      out << R"("split":"train"})" << "\n";
    }
    if (!extra_line.empty()) out << extra_line << "\n";
    out.close();
    manifest_path = tmp.str("manifest.jsonl");
  }
};

}  // namespace

TEST_CASE("a minimal valid manifest loads with resolved paths") {
  MiniCorpus corpus(ManifestMode::iemocap, 2);
  auto m = load_manifest(corpus.manifest_path);
  CHECK(m.schema_version == 1);
  CHECK(m.mode == ManifestMode::iemocap);
  REQUIRE(m.entries.size() == 2);
  CHECK(std::filesystem::path(*m.entries[0].wav_path).is_absolute());
  CHECK(m.entries[0].categorical == "happy");
}

TEST_CASE("duplicate segment ids are rejected by name") {
  MiniCorpus corpus(ManifestMode::mosei, 2,
                    R"({"segment_id":"seg0","session_id":"sess0","sentiment":-1.0,"split":"dev"})");
  CHECK_THROWS_MATCHES(load_manifest(corpus.manifest_path), DuplicateId,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("seg0")));
}

TEST_CASE("mode-inconsistent labels are rejected") {
  MiniCorpus corpus(ManifestMode::iemocap, 1,
                    R"({"segment_id":"x","session_id":"sess0","attributes":[1,2,3],"split":"train"})");
  CHECK_THROWS_AS(load_manifest(corpus.manifest_path), LabelInconsistent);

  MiniCorpus corpus2(ManifestMode::mosei, 1,
                     R"({"segment_id":"y","session_id":"sess0","split":"train"})");
  CHECK_THROWS_AS(load_manifest(corpus2.manifest_path), LabelInconsistent);
}

TEST_CASE("missing referenced files are rejected by path") {
  MiniCorpus corpus(ManifestMode::mosei, 1,
                    R"({"segment_id":"z","session_id":"sess0","wav":"nope.wav","sentiment":0.5,"split":"dev"})");
  CHECK_THROWS_MATCHES(load_manifest(corpus.manifest_path), MissingFile,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("nope.wav")));
}

TEST_CASE("conflicting depression labels or splits within a session are rejected") {
  MiniCorpus corpus(ManifestMode::depression, 2,
                    R"({"segment_id":"c","session_id":"sess0","depression_label":0,"split":"train"})");
  CHECK_THROWS_AS(load_manifest(corpus.manifest_path), LabelInconsistent);

  MiniCorpus corpus2(ManifestMode::depression, 2,
                     R"({"segment_id":"c","session_id":"sess0","depression_label":1,"split":"dev"})");
  CHECK_THROWS_AS(load_manifest(corpus2.manifest_path), LabelInconsistent);
}

TEST_CASE("manifest round trip is value-identical") {
  MiniCorpus corpus(ManifestMode::iemocap, 3);
  auto m1 = load_manifest(corpus.manifest_path);
  std::string copy = corpus.tmp.str("copy.jsonl");
  save_manifest(copy, m1);
  auto m2 = load_manifest(copy);
  REQUIRE(m1.entries.size() == m2.entries.size());
  CHECK(m1.mode == m2.mode);
  for (std::size_t i = 0; i < m1.entries.size(); ++i) {
    CHECK(m1.entries[i].segment_id == m2.entries[i].segment_id);
    CHECK(m1.entries[i].session_id == m2.entries[i].session_id);
    CHECK(m1.entries[i].wav_path == m2.entries[i].wav_path);
    CHECK(m1.entries[i].embedding_path == m2.entries[i].embedding_path);
    CHECK(m1.entries[i].categorical == m2.entries[i].categorical);
    CHECK(m1.entries[i].attributes == m2.entries[i].attributes);
    CHECK(m1.entries[i].sentiment == m2.entries[i].sentiment);
    CHECK(m1.entries[i].depression_label == m2.entries[i].depression_label);
    CHECK(m1.entries[i].split == m2.entries[i].split);
  }
}

TEST_CASE("excited folds into happy at ingestion") {
  MiniCorpus corpus(ManifestMode::iemocap, 1,
                    R"({"segment_id":"e","session_id":"sess0","categorical":"excited","attributes":[4,4,4],"split":"train"})");
  auto m = load_manifest(corpus.manifest_path);
  CHECK(m.entries[1].categorical == "happy");

  CHECK(emotion::class_from_string("excited") == emotion::class_from_string("happy"));
  CHECK_THROWS_AS(emotion::class_from_string("bored"), LabelInconsistent);
}

TEST_CASE("embedding files round-trip and reject truncation") {
  TempDir tmp("emb");
  std::vector<float> v = {1.5f, -2.25f, 3.125f};
  save_embedding(tmp.str("a.f32"), v);
  CHECK(load_embedding(tmp.str("a.f32")) == v);

  std::filesystem::resize_file(tmp.str("a.f32"), 8 + 2 * 4);
  CHECK_THROWS_AS(load_embedding(tmp.str("a.f32")), InvalidInput);
  CHECK_THROWS_AS(load_embedding(tmp.str("missing.f32")), MissingFile);
}

TEST_CASE("dataset assembly builds edge-replicated context windows in order") {
  MiniCorpus corpus(ManifestMode::iemocap, 5);
  auto m = load_manifest(corpus.manifest_path);
  LoadOptions opt;  // audio + text
  auto ds = load_emotion_dataset(m, opt);
  REQUIRE(ds.train.size() == 5);
  REQUIRE(ds.dev.empty());

  // segment 0: rows t-3..t clamp to embedding 0 (constant 1), then 2, 3, 4
  const auto& ctx = *ds.train[0].context;
  auto row_value = [&](int r) { return ctx[static_cast<std::size_t>(r) * 768]; };
  CHECK(row_value(0) == 1.0f);
  CHECK(row_value(1) == 1.0f);
  CHECK(row_value(2) == 1.0f);
  CHECK(row_value(3) == 1.0f);
  CHECK(row_value(4) == 2.0f);
  CHECK(row_value(5) == 3.0f);
  CHECK(row_value(6) == 4.0f);

  // middle segment sees its true neighbourhood
  const auto& ctx2 = *ds.train[3].context;
  for (int r = 0; r < 7; ++r)
    CHECK(ctx2[static_cast<std::size_t>(r) * 768] ==
          static_cast<float>(std::clamp(3 - 3 + r, 0, 4) + 1));

  CHECK(ds.train[0].audio->rows == dsp::frame_count(4800));
  CHECK(ds.train[0].label == emotion::class_from_string("happy"));
}

TEST_CASE("mosei segments with sentiment zero are excluded at ingestion") {
  MiniCorpus corpus(ManifestMode::mosei, 2,
                    R"({"segment_id":"zero","session_id":"sess0","wav":"seg0.wav","embedding":"seg0.f32","sentiment":0.0,"split":"train"})");
  auto m = load_manifest(corpus.manifest_path);
  REQUIRE(m.entries.size() == 3);
  LoadOptions opt;
  opt.need_audio = false;
  auto ds = load_emotion_dataset(m, opt);
  CHECK(ds.train.size() == 2);  // the zero-sentiment entry is dropped
}

TEST_CASE("depression dataset groups segments by session") {
  MiniCorpus corpus(ManifestMode::depression, 4);
  auto m = load_manifest(corpus.manifest_path);
  LoadOptions opt;
  opt.need_audio = false;
  auto ds = load_depression_dataset(m, opt);
  REQUIRE(ds.train.size() == 1);
  CHECK(ds.train[0].id == "sess0");
  CHECK(ds.train[0].label == 1);
  CHECK(ds.train[0].segments.size() == 4);

  CHECK_THROWS_AS(load_emotion_dataset(m, opt), InvalidInput);
}
