#pragma once

// End-to-end orchestration: synthetic corpora -> emotion pretraining ->
// frozen-extractor feature dump -> per-modality depression training ->
// voting fusion -> emotion-content analysis. Every stage writes under one
// run directory; provenance.json records the resolved config, corpus
// fingerprints and checkpoint hashes needed to reproduce each report.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emodep/analysis/profile.hpp"
#include "emodep/data/dataset.hpp"
#include "emodep/data/synthetic.hpp"
#include "emodep/depression/report.hpp"
#include "emodep/depression/train.hpp"
#include "emodep/emotion/io.hpp"
#include "emodep/emotion/train.hpp"
#include "emodep/errors.hpp"
#include "emodep/transfer/extractor.hpp"

namespace emodep::pipeline {

struct PipelineConfig {
  std::string out_dir = "run";
  std::uint64_t seed = 7;

  // synthetic corpora
  double margin = 5.0;
  double covariance_scale = 1.0;
  double clip_seconds_min = 0.26;
  double clip_seconds_max = 0.40;
  int iemocap_train_per_class = 40;
  int iemocap_dev_per_class = 12;
  int mosei_train_per_class = 60;
  int mosei_dev_per_class = 20;
  int dep_train_sessions_per_group = 16;
  int dep_dev_sessions_per_group = 6;
  int dep_segments_min = 8;
  int dep_segments_max = 12;
  std::string depression_source = "mosei";

  // pretraining
  std::vector<std::string> pretrain_modes = {"mosei", "iemocap"};
  std::string pretrain_modality = "at";
  emotion::TrainConfig pretrain;

  // downstream
  std::string extract_source = "mosei";
  int dep_seeds = 5;
  depression::DepressionTrainConfig dep_train;
  int jobs = 2;

  dsp::FrontendConfig frontend;  // one frontend for every stage of a run

  bool analysis_per_session = false;
  bool verbose = false;
};

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  auto get = [&](const nlohmann::json& o, const char* k, auto& dst) {
    if (o.contains(k)) dst = o.at(k).get<std::decay_t<decltype(dst)>>();
  };
  get(j, "out_dir", c.out_dir);
  get(j, "seed", c.seed);
  if (j.contains("synthetic")) {
    const auto& s = j.at("synthetic");
    get(s, "margin", c.margin);
    get(s, "covariance_scale", c.covariance_scale);
    get(s, "clip_seconds_min", c.clip_seconds_min);
    get(s, "clip_seconds_max", c.clip_seconds_max);
    get(s, "iemocap_train_per_class", c.iemocap_train_per_class);
    get(s, "iemocap_dev_per_class", c.iemocap_dev_per_class);
    get(s, "mosei_train_per_class", c.mosei_train_per_class);
    get(s, "mosei_dev_per_class", c.mosei_dev_per_class);
    get(s, "dep_train_sessions_per_group", c.dep_train_sessions_per_group);
    get(s, "dep_dev_sessions_per_group", c.dep_dev_sessions_per_group);
    get(s, "dep_segments_min", c.dep_segments_min);
    get(s, "dep_segments_max", c.dep_segments_max);
    get(s, "depression_source", c.depression_source);
  }
  if (j.contains("pretrain")) {
    const auto& p = j.at("pretrain");
    get(p, "modes", c.pretrain_modes);
    get(p, "modality", c.pretrain_modality);
    get(p, "epochs", c.pretrain.epochs);
    get(p, "batch_size", c.pretrain.batch_size);
    get(p, "patience", c.pretrain.patience);
    get(p, "lr", c.pretrain.lr);
    get(p, "seed", c.pretrain.seed);
  }
  if (j.contains("depression")) {
    const auto& d = j.at("depression");
    get(d, "seeds", c.dep_seeds);
    get(d, "epochs", c.dep_train.epochs);
    get(d, "batch_size", c.dep_train.batch_size);
    get(d, "patience", c.dep_train.patience);
    get(d, "lr", c.dep_train.lr);
    get(d, "jobs", c.jobs);
  }
  get(j, "extract_source", c.extract_source);
  if (j.contains("frontend")) {
    get(j.at("frontend"), "pre_emphasis", c.frontend.pre_emphasis);
    get(j.at("frontend"), "mean_normalize", c.frontend.mean_normalize);
  }
  if (j.contains("analysis"))
    get(j.at("analysis"), "per_session", c.analysis_per_session);
  return c;
}

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  return {
      {"out_dir", c.out_dir},
      {"seed", c.seed},
      {"synthetic",
       {{"margin", c.margin},
        {"covariance_scale", c.covariance_scale},
        {"clip_seconds_min", c.clip_seconds_min},
        {"clip_seconds_max", c.clip_seconds_max},
        {"iemocap_train_per_class", c.iemocap_train_per_class},
        {"iemocap_dev_per_class", c.iemocap_dev_per_class},
        {"mosei_train_per_class", c.mosei_train_per_class},
        {"mosei_dev_per_class", c.mosei_dev_per_class},
        {"dep_train_sessions_per_group", c.dep_train_sessions_per_group},
        {"dep_dev_sessions_per_group", c.dep_dev_sessions_per_group},
        {"dep_segments_min", c.dep_segments_min},
        {"dep_segments_max", c.dep_segments_max},
        {"depression_source", c.depression_source}}},
      {"pretrain",
       {{"modes", c.pretrain_modes},
        {"modality", c.pretrain_modality},
        {"epochs", c.pretrain.epochs},
        {"batch_size", c.pretrain.batch_size},
        {"patience", c.pretrain.patience},
        {"lr", c.pretrain.lr},
        {"seed", c.pretrain.seed}}},
      {"extract_source", c.extract_source},
      {"frontend",
       {{"pre_emphasis", c.frontend.pre_emphasis},
        {"mean_normalize", c.frontend.mean_normalize}}},
      {"depression",
       {{"seeds", c.dep_seeds},
        {"epochs", c.dep_train.epochs},
        {"batch_size", c.dep_train.batch_size},
        {"patience", c.dep_train.patience},
        {"lr", c.dep_train.lr},
        {"jobs", c.jobs}}},
      {"analysis", {{"per_session", c.analysis_per_session}}},
  };
}

namespace detail {

template <class Fn>
auto run_stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), "stage " + name + ": " + e.what());
  }
}

}  // namespace detail

// Assembles per-modality session inputs for depression training.
inline std::vector<depression::SessionData> build_session_data(
    const std::string& modality, const std::vector<data::DepressionSession>& sessions,
    const std::string& features_dir) {
  std::vector<depression::SessionData> out;
  std::uint64_t cache_hash = 0;
  bool first = true;
  for (const auto& s : sessions) {
    depression::SessionData d;
    d.id = s.id;
    d.label = s.label;
    if (modality == "audio") {
      d.features = depression::audio_session_features(s.segments);
    } else if (modality == "text") {
      d.features = depression::text_session_features(s.segments);
    } else if (modality == "emotion") {
      auto cached = transfer::load_feature_cache(
          (std::filesystem::path(features_dir) / (s.id + ".feat")).string());
      if (first) {
        cache_hash = cached.ckpt_hash;
        first = false;
      } else if (cached.ckpt_hash != cache_hash) {
        throw InvalidInput("feature cache for session '" + s.id +
                           "' was produced by a different checkpoint");
      }
      if (cached.seq.rows != static_cast<int>(s.segments.size()))
        throw InvalidInput("feature cache for session '" + s.id + "' has " +
                           std::to_string(cached.seq.rows) + " rows, manifest has " +
                           std::to_string(s.segments.size()) + " segments");
      d.features = std::move(cached.seq);
    } else {
      throw InvalidInput("unknown depression modality '" + modality +
                         "', want audio|text|emotion");
    }
    out.push_back(std::move(d));
  }
  return out;
}

struct PipelineResult {
  nlohmann::json provenance;
  std::string out_dir;
};

inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path out(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(out / "corpora", ec);
  fs::create_directories(out / "ckpt", ec);
  fs::create_directories(out / "features", ec);
  fs::create_directories(out / "reports", ec);
  fs::create_directories(out / "analysis", ec);
  if (ec) throw IoError("cannot create run directory " + cfg.out_dir + ": " + ec.message());

  nlohmann::json prov;
  prov["config"] = config_to_json(cfg);

  // --- corpora ---------------------------------------------------------
  auto corpora = detail::run_stage("gen-synthetic", [&] {
    nlohmann::json meta;
    auto base_spec = [&](data::ManifestMode mode) {
      data::SyntheticSpec s;
      s.seed = cfg.seed;
      s.mode = mode;
      s.margin = cfg.margin;
      s.covariance_scale = cfg.covariance_scale;
      s.clip_seconds_min = cfg.clip_seconds_min;
      s.clip_seconds_max = cfg.clip_seconds_max;
      return s;
    };
    for (const auto& mode_name : cfg.pretrain_modes) {
      data::SyntheticSpec s = base_spec(data::manifest_mode_from_string(mode_name));
      if (s.mode == data::ManifestMode::iemocap) {
        s.train_per_class = cfg.iemocap_train_per_class;
        s.dev_per_class = cfg.iemocap_dev_per_class;
      } else {
        s.train_per_class = cfg.mosei_train_per_class;
        s.dev_per_class = cfg.mosei_dev_per_class;
      }
      std::string dir = (out / "corpora" / mode_name).string();
      data::gen_synthetic(s, dir);
      meta[mode_name] = {{"manifest", dir + "/manifest.jsonl"},
                         {"fingerprint", hash_hex(data::corpus_fingerprint(dir + "/manifest.jsonl"))}};
    }
    data::SyntheticSpec s = base_spec(data::ManifestMode::depression);
    s.train_sessions_per_group = cfg.dep_train_sessions_per_group;
    s.dev_sessions_per_group = cfg.dep_dev_sessions_per_group;
    s.segments_per_session_min = cfg.dep_segments_min;
    s.segments_per_session_max = cfg.dep_segments_max;
    s.depression_source = data::manifest_mode_from_string(cfg.depression_source);
    std::string dir = (out / "corpora" / "depression").string();
    data::gen_synthetic(s, dir);
    meta["depression"] = {{"manifest", dir + "/manifest.jsonl"},
                          {"fingerprint", hash_hex(data::corpus_fingerprint(dir + "/manifest.jsonl"))}};
    return meta;
  });
  prov["corpora"] = corpora;

  // --- pretraining ------------------------------------------------------
  emotion::Modality modality = emotion::modality_from_string(cfg.pretrain_modality);
  nlohmann::json ckpts;
  for (const auto& mode_name : cfg.pretrain_modes) {
    detail::run_stage("pretrain", [&] {
      emotion::Mode mode = emotion::mode_from_string(mode_name);
      data::Manifest man =
          data::load_manifest(corpora.at(mode_name).at("manifest").get<std::string>());
      data::LoadOptions opt;
      opt.need_audio = emotion::uses_audio(modality);
      opt.need_text = emotion::uses_text(modality);
      opt.frontend = cfg.frontend;
      auto ds = data::load_emotion_dataset(man, opt);
      emotion::TrainConfig tc = cfg.pretrain;
      tc.verbose = cfg.verbose;
      auto result = emotion::train_emotion<float>(ds.train, ds.dev, mode, modality, tc);
      std::string ckpt = (out / "ckpt" / (mode_name + "_" + cfg.pretrain_modality + ".ckpt")).string();
      std::uint64_t h = emotion::save_emotion_model(ckpt, result.model, tc, cfg.frontend);
      nlohmann::json metrics;
      if (mode == emotion::Mode::iemocap) {
        metrics = {{"wa", result.dev_metrics.wa},
                   {"ua", result.dev_metrics.ua},
                   {"mae", result.dev_metrics.mae}};
      } else {
        metrics = {{"acc2", result.dev_metrics.acc2}, {"f1", result.dev_metrics.f1}};
      }
      ckpts[mode_name] = {{"path", ckpt},
                          {"hash", hash_hex(h)},
                          {"epochs_run", result.epochs_run},
                          {"dev", metrics}};
      return 0;
    });
  }
  prov["checkpoints"] = ckpts;

  // --- depression data --------------------------------------------------
  data::DepressionDataset dep = detail::run_stage("load-depression", [&] {
    data::Manifest man =
        data::load_manifest(corpora.at("depression").at("manifest").get<std::string>());
    data::LoadOptions opt;
    opt.frontend = cfg.frontend;
    return data::load_depression_dataset(man, opt);
  });

  // --- extraction -------------------------------------------------------
  std::uint64_t extractor_hash = detail::run_stage("extract", [&] {
    if (!ckpts.contains(cfg.extract_source))
      throw MissingFile("no checkpoint for extract source '" + cfg.extract_source + "'");
    auto ex = transfer::load_frozen(ckpts.at(cfg.extract_source).at("path").get<std::string>());
    for (const auto* split : {&dep.train, &dep.dev})
      for (const auto& s : *split) {
        auto seq = transfer::extract_session(ex, s.segments);
        transfer::save_feature_cache((out / "features" / (s.id + ".feat")).string(),
                                     ex.hash, seq);
      }
    return ex.hash;
  });
  prov["extractor_hash"] = hash_hex(extractor_hash);

  // --- per-modality depression training ---------------------------------
  nlohmann::json reports;
  std::vector<std::pair<std::string, depression::CellKind>> modalities = {
      {"audio", depression::CellKind::gru},
      {"text", depression::CellKind::lstm},
      {"emotion", depression::CellKind::lstm},
  };
  depression::ExperimentReport audio_rep, text_rep, emotion_rep;
  for (const auto& [name, kind] : modalities) {
    detail::run_stage("train-depression", [&, name = name, kind = kind] {
      auto train = build_session_data(name, dep.train, (out / "features").string());
      auto devd = build_session_data(name, dep.dev, (out / "features").string());
      depression::DepressionTrainConfig dc = cfg.dep_train;
      dc.verbose = cfg.verbose;
      auto rep = depression::multi_seed_protocol(kind, train, devd, cfg.dep_seeds, dc,
                                                 name, cfg.jobs);
      std::string path = (out / "reports" / (name + ".json")).string();
      depression::write_experiment_report(path, rep);
      reports[name] = {{"path", path},
                       {"f1_max", rep.f1_max},
                       {"f1_avg", rep.f1_avg},
                       {"f1_std", rep.f1_std}};
      if (name == "audio") audio_rep = rep;
      if (name == "text") text_rep = rep;
      if (name == "emotion") emotion_rep = rep;
      return 0;
    });
  }

  // --- fusion ------------------------------------------------------------
  detail::run_stage("fuse-eval", [&] {
    auto fused = depression::fuse_reports(audio_rep, text_rep, emotion_rep);
    std::string path = (out / "reports" / "fused.json").string();
    depression::write_fused_report(path, fused);
    reports["fused"] = {{"path", path}, {"f1", fused.f1}};
    return 0;
  });
  prov["reports"] = reports;

  // --- analysis ----------------------------------------------------------
  nlohmann::json analysis_meta;
  for (const auto& mode_name : cfg.pretrain_modes) {
    detail::run_stage("analyze", [&] {
      auto lm = emotion::load_emotion_model(ckpts.at(mode_name).at("path").get<std::string>());
      analysis::AnalysisOptions opt{cfg.analysis_per_session};
      std::vector<analysis::AnalysisTable> tables;
      if (lm.model.mode == emotion::Mode::iemocap) {
        auto cat = analysis::categorical_distribution(lm.model, dep.train, opt);
        auto attr = analysis::attribute_profile(lm.model, dep.train, opt);
        tables.insert(tables.end(), cat.begin(), cat.end());
        tables.insert(tables.end(), attr.begin(), attr.end());
      } else {
        auto sent = analysis::sentiment_profile(lm.model, dep.train, opt);
        tables.insert(tables.end(), sent.begin(), sent.end());
      }
      auto files = analysis::emit_report(tables, (out / "analysis" / mode_name).string());
      analysis_meta[mode_name] = files;
      return 0;
    });
  }
  prov["analysis"] = analysis_meta;

  std::ofstream pout((out / "provenance.json").string());
  if (!pout) throw IoError("cannot write provenance.json");
  pout << prov.dump(2) << "\n";

  return {prov, cfg.out_dir};
}

}  // namespace emodep::pipeline
