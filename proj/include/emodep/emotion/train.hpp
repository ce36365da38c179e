#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <vector>

#include "emodep/emotion/loss.hpp"
#include "emodep/emotion/metrics.hpp"
#include "emodep/emotion/model.hpp"
#include "emodep/errors.hpp"
#include "emodep/nn/adam.hpp"

namespace emodep::emotion {

struct TrainConfig {
  int epochs = 100;
  int min_epochs = 0;  // never stop before this many epochs
  int batch_size = 16;
  int patience = 20;  // epochs without dev improvement before stopping
  double lr = 1e-3;
  LossConfig loss;
  std::uint64_t seed = 0;
  bool verbose = false;
};

template <class T>
EvalMetrics evaluate(const EmotionModel<T>& model, const std::vector<EmotionSegment>& segs) {
  if (segs.empty()) throw EmptyDataset("evaluate: no segments");
  EvalMetrics m;
  m.mode = model.mode;
  if (model.mode == Mode::iemocap) {
    std::vector<int> preds, labels;
    std::vector<std::array<float, 3>> attr_preds, attr_labels;
    for (const auto& seg : segs) {
      if (!seg.label || !seg.attributes)
        throw LabelMissing("segment '" + seg.id + "' lacks iemocap labels");
      auto pred = model.forward(seg);
      const auto& logits = pred.class_logits->value();
      int best = 0;
      for (int c = 1; c < kNumClasses; ++c)
        if (logits[c] > logits[best]) best = c;
      preds.push_back(best);
      labels.push_back(*seg.label);
      const auto& av = pred.attribute_preds->value();
      attr_preds.push_back({static_cast<float>(av[0]), static_cast<float>(av[1]),
                            static_cast<float>(av[2])});
      attr_labels.push_back(*seg.attributes);
    }
    m.wa = weighted_accuracy(preds, labels);
    m.ua = unweighted_accuracy(preds, labels);
    m.mae = attribute_mae(attr_preds, attr_labels);
  } else {
    std::vector<int> preds, labels;
    for (const auto& seg : segs) {
      if (!seg.sentiment)
        throw LabelMissing("segment '" + seg.id + "' lacks a sentiment score");
      auto pred = model.forward(seg);
      preds.push_back(pred.sentiment_logit->value()[0] > 0 ? 1 : 0);
      labels.push_back(*seg.sentiment > 0 ? 1 : 0);
    }
    m.acc2 = binary_accuracy(preds, labels);
    m.f1 = f1_positive(preds, labels);
  }
  return m;
}

template <class T>
struct TrainResult {
  EmotionModel<T> model;
  EvalMetrics dev_metrics;
  int epochs_run = 0;
  std::vector<double> dev_history;  // primary metric per epoch
};

// Mini-batch training with per-epoch dev evaluation. Keeps the best
// dev-primary parameters (UA for iemocap, Acc2 for mosei) and stops early
// after `patience` epochs without improvement or once the metric is perfect.
template <class T>
TrainResult<T> train_emotion(const std::vector<EmotionSegment>& train,
                             const std::vector<EmotionSegment>& dev,
                             Mode mode, Modality modality, const TrainConfig& cfg) {
  if (train.empty()) throw EmptyDataset("train_emotion: empty training set");
  if (dev.empty()) throw EmptyDataset("train_emotion: empty dev set");

  TrainResult<T> result;
  result.model = EmotionModel<T>::init(mode, modality, cfg.seed);
  auto& model = result.model;
  auto params = model.params();
  nn::Adam<T> opt(params, {static_cast<T>(cfg.lr)});
  std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ull + 1);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double best = -1.0;
  std::vector<std::vector<T>> best_values;
  int since_best = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch_size) {
      std::size_t b1 = std::min(order.size(), b0 + cfg.batch_size);
      nn::Tensor<T> batch_loss;
      for (std::size_t i = b0; i < b1; ++i) {
        const auto& seg = train[order[i]];
        auto pred = model.forward(seg);
        auto loss = training_loss(model, pred, seg, cfg.loss);
        batch_loss = batch_loss.defined() ? nn::add(batch_loss, loss) : loss;
      }
      batch_loss = nn::scale(batch_loss, T(1) / static_cast<T>(b1 - b0));
      if (!std::isfinite(static_cast<double>(batch_loss.item())))
        throw NonFiniteLoss("train_emotion: non-finite loss in epoch " +
                            std::to_string(epoch) + ", batch " +
                            std::to_string(b0 / cfg.batch_size));
      nn::backward(batch_loss);
      opt.step();
      opt.zero_grad();
    }

    EvalMetrics dm = evaluate(model, dev);
    double primary = dm.primary();
    result.dev_history.push_back(primary);
    result.epochs_run = epoch + 1;
    if (cfg.verbose)
      std::fprintf(stderr, "[pretrain] epoch %d dev %s=%.4f\n", epoch + 1,
                   mode == Mode::iemocap ? "UA" : "Acc2", primary);
    if (primary > best) {
      best = primary;
      result.dev_metrics = dm;
      best_values.clear();
      for (const auto& p : params) best_values.push_back(p.value());
      since_best = 0;
    } else {
      ++since_best;
    }
    if (epoch + 1 >= cfg.min_epochs && (best >= 1.0 || since_best > cfg.patience))
      break;
  }

  for (std::size_t i = 0; i < params.size(); ++i) params[i].value() = best_values[i];
  return result;
}

}  // namespace emodep::emotion
