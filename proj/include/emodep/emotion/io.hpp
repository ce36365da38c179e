#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "emodep/emotion/model.hpp"
#include "emodep/emotion/train.hpp"
#include "emodep/errors.hpp"
#include "emodep/nn/checkpoint.hpp"

namespace emodep::emotion {

// A model checkpoint is the binary tensor container plus a JSON sidecar
// (<ckpt>.json) describing mode, modality, layer dims, penalty weights and
// the training configuration that produced it.
inline std::string sidecar_path(const std::string& ckpt_path) { return ckpt_path + ".json"; }

inline nlohmann::json config_to_json(const EmotionNetConfig& c) {
  return {
      {"tdnn_width", c.tdnn_width},
      {"tdnn_contexts", c.tdnn_contexts},
      {"attention_heads", c.attention_heads},
      {"attention_hidden", c.attention_hidden},
      {"spiky_heads", c.spiky_heads},
      {"audio_out", c.audio_out},
      {"text_hidden", c.text_hidden},
      {"text_out", c.text_out},
      {"fusion_width", c.fusion_width},
  };
}

inline EmotionNetConfig config_from_json(const nlohmann::json& j) {
  EmotionNetConfig c;
  c.tdnn_width = j.at("tdnn_width").get<int>();
  c.tdnn_contexts = j.at("tdnn_contexts").get<std::vector<std::vector<int>>>();
  c.attention_heads = j.at("attention_heads").get<int>();
  c.attention_hidden = j.at("attention_hidden").get<int>();
  c.spiky_heads = j.at("spiky_heads").get<int>();
  c.audio_out = j.at("audio_out").get<int>();
  c.text_hidden = j.at("text_hidden").get<int>();
  c.text_out = j.at("text_out").get<int>();
  c.fusion_width = j.at("fusion_width").get<int>();
  return c;
}

inline std::uint64_t save_emotion_model(const std::string& path,
                                        const EmotionModel<float>& model,
                                        const TrainConfig& train_cfg,
                                        const dsp::FrontendConfig& frontend = {}) {
  auto named = model.named_params();
  nn::save_checkpoint(path, named);
  nlohmann::json side = {
      {"mode", to_string(model.mode)},
      {"modality", to_string(model.modality)},
      {"dims", config_to_json(model.cfg)},
      {"frontend",
       {{"pre_emphasis", frontend.pre_emphasis},
        {"mean_normalize", frontend.mean_normalize}}},
      {"penalties",
       {{"div", train_cfg.loss.penalties.div},
        {"spiky", train_cfg.loss.penalties.spiky},
        {"smooth", train_cfg.loss.penalties.smooth}}},
      {"train",
       {{"epochs", train_cfg.epochs},
        {"batch_size", train_cfg.batch_size},
        {"patience", train_cfg.patience},
        {"lr", train_cfg.lr},
        {"attr_weight", train_cfg.loss.attr_weight},
        {"huber_delta", train_cfg.loss.huber_delta}}},
      {"seed", train_cfg.seed},
  };
  std::ofstream out(sidecar_path(path));
  if (!out) throw IoError("cannot write sidecar: " + sidecar_path(path));
  out << side.dump(2) << "\n";
  return nn::content_hash(named);
}

struct LoadedModel {
  EmotionModel<float> model;
  std::uint64_t hash = 0;
  dsp::FrontendConfig frontend;  // the frontend the model was trained with
  nlohmann::json sidecar;
};

inline LoadedModel load_emotion_model(const std::string& path) {
  std::ifstream side_in(sidecar_path(path));
  if (!side_in) throw MissingFile("checkpoint sidecar not found: " + sidecar_path(path));
  nlohmann::json side;
  try {
    side_in >> side;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("bad sidecar " + sidecar_path(path) + ": " + e.what());
  }

  LoadedModel lm;
  lm.sidecar = side;
  Mode mode = mode_from_string(side.at("mode").get<std::string>());
  Modality modality = modality_from_string(side.at("modality").get<std::string>());
  EmotionNetConfig cfg = config_from_json(side.at("dims"));
  if (side.contains("frontend")) {
    lm.frontend.pre_emphasis = side.at("frontend").value("pre_emphasis", false);
    lm.frontend.mean_normalize = side.at("frontend").value("mean_normalize", false);
  }
  lm.model = EmotionModel<float>::init(mode, modality, 0, cfg);

  nn::Checkpoint ck = nn::load_checkpoint(path);
  auto named = lm.model.named_params();
  nn::load_into(ck, named);
  lm.hash = ck.hash;
  return lm;
}

}  // namespace emodep::emotion
