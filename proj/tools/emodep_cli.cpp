// Command-line driver for the emotion-transfer depression detection toolkit.
// Every failure exits nonzero with one machine-readable JSON object on
// stderr: {"error": <code>, "message": <detail>}.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "emodep/analysis/profile.hpp"
#include "emodep/data/dataset.hpp"
#include "emodep/data/synthetic.hpp"
#include "emodep/depression/report.hpp"
#include "emodep/depression/train.hpp"
#include "emodep/emotion/gradcheck.hpp"
#include "emodep/emotion/io.hpp"
#include "emodep/emotion/train.hpp"
#include "emodep/errors.hpp"
#include "emodep/pipeline/run.hpp"
#include "emodep/transfer/extractor.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct PretrainArgs {
  std::string mode, modality = "at", manifest, out;
  std::uint64_t seed = 0;
  emodep::emotion::TrainConfig train;
  emodep::dsp::FrontendConfig frontend;
  bool verbose = false;
};

void cmd_pretrain(const PretrainArgs& a) {
  using namespace emodep;
  emotion::Mode mode = emotion::mode_from_string(a.mode);
  emotion::Modality modality = emotion::modality_from_string(a.modality);
  data::Manifest man = data::load_manifest(a.manifest);
  data::LoadOptions opt;
  opt.need_audio = emotion::uses_audio(modality);
  opt.need_text = emotion::uses_text(modality);
  opt.frontend = a.frontend;
  auto ds = data::load_emotion_dataset(man, opt);
  emotion::TrainConfig cfg = a.train;
  cfg.seed = a.seed;
  cfg.verbose = a.verbose;
  auto result = emotion::train_emotion<float>(ds.train, ds.dev, mode, modality, cfg);
  std::uint64_t hash = emotion::save_emotion_model(a.out, result.model, cfg, a.frontend);
  json metrics = mode == emotion::Mode::iemocap
                     ? json{{"wa", result.dev_metrics.wa},
                            {"ua", result.dev_metrics.ua},
                            {"mae_v", result.dev_metrics.mae[0]},
                            {"mae_a", result.dev_metrics.mae[1]},
                            {"mae_d", result.dev_metrics.mae[2]}}
                     : json{{"acc2", result.dev_metrics.acc2}, {"f1", result.dev_metrics.f1}};
  std::cout << json{{"checkpoint", a.out},
                    {"hash", hash_hex(hash)},
                    {"epochs_run", result.epochs_run},
                    {"dev", metrics}}
                   .dump(2)
            << "\n";
}

struct ExtractArgs {
  std::string ckpt, manifest, out;
};

void cmd_extract(const ExtractArgs& a) {
  using namespace emodep;
  auto ex = transfer::load_frozen(a.ckpt);
  data::Manifest man = data::load_manifest(a.manifest);
  data::LoadOptions opt;
  opt.need_audio = emotion::uses_audio(ex.model.modality);
  opt.need_text = emotion::uses_text(ex.model.modality);
  opt.frontend = ex.frontend;  // match the pretraining frontend exactly
  auto ds = data::load_depression_dataset(man, opt);
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw IoError("cannot create " + a.out + ": " + ec.message());
  int count = 0;
  for (const auto* split : {&ds.train, &ds.dev})
    for (const auto& s : *split) {
      auto seq = transfer::extract_session(ex, s.segments);
      transfer::save_feature_cache((fs::path(a.out) / (s.id + ".feat")).string(),
                                   ex.hash, seq);
      ++count;
    }
  std::cout << json{{"sessions", count},
                    {"dim", ex.feature_dim()},
                    {"checkpoint_hash", hash_hex(ex.hash)},
                    {"out", a.out}}
                   .dump(2)
            << "\n";
}

struct TrainDepArgs {
  std::string modality, manifest, features, out;
  int seeds = 20;
  int jobs = 1;
  emodep::depression::DepressionTrainConfig train;
  emodep::dsp::FrontendConfig frontend;
  bool verbose = false;
};

void cmd_train_depression(const TrainDepArgs& a) {
  using namespace emodep;
  data::Manifest man = data::load_manifest(a.manifest);
  data::LoadOptions opt;
  opt.need_audio = a.modality == "audio";
  opt.need_text = a.modality == "text";
  opt.frontend = a.frontend;
  auto ds = data::load_depression_dataset(man, opt);
  if (a.modality == "emotion" && a.features.empty())
    throw InvalidInput("--features DIR is required for the emotion modality");
  auto train = pipeline::build_session_data(a.modality, ds.train, a.features);
  auto dev = pipeline::build_session_data(a.modality, ds.dev, a.features);
  depression::CellKind kind = a.modality == "audio" ? depression::CellKind::gru
                                                    : depression::CellKind::lstm;
  depression::DepressionTrainConfig cfg = a.train;
  cfg.verbose = a.verbose;
  auto rep = depression::multi_seed_protocol(kind, train, dev, a.seeds, cfg,
                                             a.modality, a.jobs);
  depression::write_experiment_report(a.out, rep);
  std::cout << json{{"modality", rep.modality},
                    {"f1_max", rep.f1_max},
                    {"f1_avg", rep.f1_avg},
                    {"f1_std", rep.f1_std},
                    {"best_seed", rep.best_seed()},
                    {"report", a.out}}
                   .dump(2)
            << "\n";
}

struct FuseArgs {
  std::vector<std::string> reports;
  std::string out;
};

void cmd_fuse(const FuseArgs& a) {
  using namespace emodep;
  auto ra = depression::read_experiment_report(a.reports[0]);
  auto rt = depression::read_experiment_report(a.reports[1]);
  auto re = depression::read_experiment_report(a.reports[2]);
  auto fused = depression::fuse_reports(ra, rt, re);
  depression::write_fused_report(a.out, fused);
  std::cout << json{{"f1", fused.f1},
                    {"audio_seed", fused.audio_seed},
                    {"text_seed", fused.text_seed},
                    {"emotion_seed", fused.emotion_seed},
                    {"report", a.out}}
                   .dump(2)
            << "\n";
}

struct AnalyzeArgs {
  std::string ckpt, manifest, out, split = "train";
  bool per_session = false;
};

void cmd_analyze(const AnalyzeArgs& a) {
  using namespace emodep;
  auto lm = emotion::load_emotion_model(a.ckpt);
  data::Manifest man = data::load_manifest(a.manifest);
  data::LoadOptions opt;
  opt.need_audio = emotion::uses_audio(lm.model.modality);
  opt.need_text = emotion::uses_text(lm.model.modality);
  opt.frontend = lm.frontend;
  auto ds = data::load_depression_dataset(man, opt);
  std::vector<data::DepressionSession> sessions;
  if (a.split == "train" || a.split == "all")
    sessions.insert(sessions.end(), ds.train.begin(), ds.train.end());
  if (a.split == "dev" || a.split == "all")
    sessions.insert(sessions.end(), ds.dev.begin(), ds.dev.end());
  if (a.split != "train" && a.split != "dev" && a.split != "all")
    throw InvalidInput("--split must be train|dev|all");

  analysis::AnalysisOptions opts{a.per_session};
  std::vector<analysis::AnalysisTable> tables;
  if (lm.model.mode == emotion::Mode::iemocap) {
    auto cat = analysis::categorical_distribution(lm.model, sessions, opts);
    auto attr = analysis::attribute_profile(lm.model, sessions, opts);
    tables.insert(tables.end(), cat.begin(), cat.end());
    tables.insert(tables.end(), attr.begin(), attr.end());
  } else {
    auto sent = analysis::sentiment_profile(lm.model, sessions, opts);
    tables.insert(tables.end(), sent.begin(), sent.end());
  }
  auto files = analysis::emit_report(tables, a.out);
  std::cout << json{{"files", files}}.dump(2) << "\n";
}

struct GenArgs {
  std::string mode, out, source = "mosei";
  emodep::data::SyntheticSpec spec;
};

void cmd_gen(const GenArgs& a) {
  using namespace emodep;
  data::SyntheticSpec spec = a.spec;
  spec.mode = data::manifest_mode_from_string(a.mode);
  spec.depression_source = data::manifest_mode_from_string(a.source);
  auto man = data::gen_synthetic(spec, a.out);
  std::string manifest_path = (fs::path(a.out) / "manifest.jsonl").string();
  std::cout << json{{"manifest", manifest_path},
                    {"entries", man.entries.size()},
                    {"fingerprint", hash_hex(data::corpus_fingerprint(manifest_path))}}
                   .dump(2)
            << "\n";
}

struct PipelineArgs {
  std::string config_path, out_dir;
  int seeds = -1;
  bool verbose = false;
};

void cmd_pipeline(const PipelineArgs& a) {
  using namespace emodep;
  pipeline::PipelineConfig cfg;
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    if (!in) throw MissingFile("config not found: " + a.config_path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw InvalidInput("bad config " + a.config_path + ": " + e.what());
    }
    cfg = pipeline::config_from_json(j);
  }
  if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
  if (a.seeds > 0) cfg.dep_seeds = a.seeds;
  cfg.verbose = a.verbose;
  auto result = pipeline::run_pipeline(cfg);
  std::cout << json{{"out_dir", result.out_dir},
                    {"reports", result.provenance.at("reports")}}
                   .dump(2)
            << "\n";
}

struct GradcheckArgs {
  int frames = 20;
  int coords = 8;
  std::uint64_t seed = 42;
  double tolerance = 1e-4;
};

void cmd_gradcheck(const GradcheckArgs& a) {
  using namespace emodep;
  double e1 = emotion::full_model_grad_check(emotion::Mode::iemocap, a.frames,
                                             a.coords, a.seed);
  double e2 = emotion::full_model_grad_check(emotion::Mode::mosei, a.frames,
                                             a.coords, a.seed);
  bool ok = e1 < a.tolerance && e2 < a.tolerance;
  std::cout << json{{"iemocap_at_max_rel_err", e1},
                    {"mosei_at_max_rel_err", e2},
                    {"tolerance", a.tolerance},
                    {"pass", ok}}
                   .dump(2)
            << "\n";
  if (!ok) throw NonFiniteGradient("gradient check exceeded tolerance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"emodep: emotion-to-depression transfer learning toolkit"};
  app.require_subcommand(1);

  PretrainArgs pre;
  auto* sp = app.add_subcommand("pretrain", "Train a two-branch emotion recognizer");
  sp->add_option("--mode", pre.mode, "iemocap|mosei")->required();
  sp->add_option("--modality", pre.modality, "a|t|at (default at)");
  sp->add_option("--manifest", pre.manifest, "emotion manifest (JSONL)")->required();
  sp->add_option("--out", pre.out, "output checkpoint path")->required();
  sp->add_option("--seed", pre.seed, "training seed (default 0)");
  sp->add_option("--epochs", pre.train.epochs, "max epochs (default 100)");
  sp->add_option("--batch-size", pre.train.batch_size, "batch size (default 16)");
  sp->add_option("--patience", pre.train.patience, "early-stop patience (default 20)");
  sp->add_option("--lr", pre.train.lr, "Adam learning rate (default 1e-3)");
  sp->add_option("--attr-weight", pre.train.loss.attr_weight,
                 "attribute regression weight (default 1)");
  sp->add_option("--huber-delta", pre.train.loss.huber_delta, "Huber delta (default 1)");
  sp->add_option("--lambda-div", pre.train.loss.penalties.div,
                 "attention diversity penalty (default 0.1)");
  sp->add_option("--lambda-spiky", pre.train.loss.penalties.spiky,
                 "spiky-head penalty (default 0.1)");
  sp->add_option("--lambda-smooth", pre.train.loss.penalties.smooth,
                 "smooth-head penalty (default 0.1)");
  sp->add_flag("--pre-emphasis", pre.frontend.pre_emphasis,
               "enable pre-emphasis in the audio frontend");
  sp->add_flag("--mean-normalize", pre.frontend.mean_normalize,
               "per-utterance mean normalization of FBKs");
  sp->add_flag("--verbose", pre.verbose, "per-epoch progress on stderr");
  sp->callback([&] { cmd_pretrain(pre); });

  ExtractArgs ext;
  auto* se = app.add_subcommand("extract",
                                "Dump frozen-extractor features for every session");
  se->add_option("--ckpt", ext.ckpt, "pretrained emotion checkpoint")->required();
  se->add_option("--manifest", ext.manifest, "depression manifest")->required();
  se->add_option("--out", ext.out, "feature cache directory")->required();
  se->callback([&] { cmd_extract(ext); });

  TrainDepArgs dep;
  auto* sd = app.add_subcommand("train-depression",
                                "Multi-seed session-level depression training");
  sd->add_option("--modality", dep.modality, "audio|text|emotion")->required();
  sd->add_option("--manifest", dep.manifest, "depression manifest")->required();
  sd->add_option("--features", dep.features, "feature cache dir (emotion modality)");
  sd->add_option("--seeds", dep.seeds, "number of seeds (default 20)");
  sd->add_option("--jobs", dep.jobs, "parallel seed workers (default 1)");
  sd->add_option("--out", dep.out, "output report JSON")->required();
  sd->add_option("--epochs", dep.train.epochs, "max epochs (default 100)");
  sd->add_option("--batch-size", dep.train.batch_size, "batch size (default 8)");
  sd->add_option("--patience", dep.train.patience, "early-stop patience (default 20)");
  sd->add_option("--lr", dep.train.lr, "Adam learning rate (default 1e-3)");
  sd->add_flag("--pre-emphasis", dep.frontend.pre_emphasis,
               "enable pre-emphasis in the audio frontend");
  sd->add_flag("--mean-normalize", dep.frontend.mean_normalize,
               "per-utterance mean normalization of FBKs");
  sd->add_flag("--verbose", dep.verbose, "per-epoch progress on stderr");
  sd->callback([&] { cmd_train_depression(dep); });

  FuseArgs fuse;
  auto* sf = app.add_subcommand("fuse-eval", "Majority-vote fusion of three reports");
  sf->add_option("--reports", fuse.reports, "audio, text, emotion report JSONs")
      ->expected(3)
      ->required();
  sf->add_option("--out", fuse.out, "output fused report JSON")->required();
  sf->callback([&] { cmd_fuse(fuse); });

  AnalyzeArgs ana;
  auto* sa = app.add_subcommand("analyze",
                                "Emotion-content analysis of depression sessions");
  sa->add_option("--ckpt", ana.ckpt, "pretrained emotion checkpoint")->required();
  sa->add_option("--manifest", ana.manifest, "depression manifest")->required();
  sa->add_option("--out", ana.out, "output directory")->required();
  sa->add_option("--split", ana.split, "train|dev|all (default train)");
  sa->add_flag("--per-session", ana.per_session,
               "average within each session before grouping");
  sa->callback([&] { cmd_analyze(ana); });

  GenArgs gen;
  auto* sg = app.add_subcommand("gen-synthetic", "Generate a synthetic corpus");
  sg->add_option("--mode", gen.mode, "iemocap|mosei|depression")->required();
  sg->add_option("--out", gen.out, "output corpus directory")->required();
  sg->add_option("--seed", gen.spec.seed, "corpus seed (default 0)");
  sg->add_option("--margin", gen.spec.margin, "separability margin (default 5)");
  sg->add_option("--covariance-scale", gen.spec.covariance_scale,
                 "embedding noise scale (default 1)");
  sg->add_option("--train-per-class", gen.spec.train_per_class,
                 "train segments per class (default 50)");
  sg->add_option("--dev-per-class", gen.spec.dev_per_class,
                 "dev segments per class (default 20)");
  sg->add_option("--train-sessions", gen.spec.train_sessions_per_group,
                 "train sessions per group (default 20)");
  sg->add_option("--dev-sessions", gen.spec.dev_sessions_per_group,
                 "dev sessions per group (default 8)");
  sg->add_option("--segments-min", gen.spec.segments_per_session_min,
                 "min segments per session (default 8)");
  sg->add_option("--segments-max", gen.spec.segments_per_session_max,
                 "max segments per session (default 12)");
  sg->add_option("--clip-seconds-min", gen.spec.clip_seconds_min,
                 "min clip length (default 0.26)");
  sg->add_option("--clip-seconds-max", gen.spec.clip_seconds_max,
                 "max clip length (default 0.40)");
  sg->add_option("--source", gen.source,
                 "depression content source: iemocap|mosei (default mosei)");
  sg->callback([&] { cmd_gen(gen); });

  PipelineArgs pipe;
  auto* spp = app.add_subcommand("run-pipeline", "Run the full pipeline end to end");
  spp->add_option("--config", pipe.config_path, "pipeline config JSON");
  spp->add_option("--out", pipe.out_dir, "run directory (overrides config)");
  spp->add_option("--seeds", pipe.seeds, "depression seeds (overrides config)");
  spp->add_flag("--verbose", pipe.verbose, "stage progress on stderr");
  spp->callback([&] { cmd_pipeline(pipe); });

  GradcheckArgs gc;
  auto* sgc = app.add_subcommand("gradcheck",
                                 "Finite-difference check of the full model");
  sgc->add_option("--frames", gc.frames, "audio frames (default 20)");
  sgc->add_option("--coords", gc.coords, "coordinates probed per tensor (default 8)");
  sgc->add_option("--seed", gc.seed, "probe seed (default 42)");
  sgc->add_option("--tolerance", gc.tolerance, "max relative error (default 1e-4)");
  sgc->callback([&] { cmd_gradcheck(gc); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const emodep::Error& e) {
    std::cerr << json{{"error", e.code()}, {"message", e.what()}}.dump() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << std::endl;
    return 2;
  }
  return 0;
}
