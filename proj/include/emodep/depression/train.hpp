#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "emodep/depression/model.hpp"
#include "emodep/emotion/metrics.hpp"
#include "emodep/errors.hpp"
#include "emodep/nn/adam.hpp"

namespace emodep::depression {

// F1 of the depressed class: 2PR / (P + R), 0 by convention when P + R = 0.
inline double f1_depressed(const std::vector<int>& preds, const std::vector<int>& labels) {
  return emotion::f1_positive(preds, labels);
}

// Majority of three binary votes.
inline int vote_fusion(int pred_audio, int pred_text, int pred_emotion) {
  return pred_audio + pred_text + pred_emotion >= 2 ? 1 : 0;
}

struct F1Aggregate {
  double max = 0.0;
  double avg = 0.0;
  double std_dev = 0.0;  // population standard deviation
};

inline F1Aggregate aggregate_f1(const std::vector<double>& f1s) {
  if (f1s.empty()) throw EmptyDataset("aggregate_f1: no seed results");
  F1Aggregate a;
  a.max = *std::max_element(f1s.begin(), f1s.end());
  for (double f : f1s) a.avg += f;
  a.avg /= static_cast<double>(f1s.size());
  double sq = 0.0;
  for (double f : f1s) sq += (f - a.avg) * (f - a.avg);
  a.std_dev = std::sqrt(sq / static_cast<double>(f1s.size()));
  return a;
}

// One session prepared for a single modality.
struct SessionData {
  std::string id;
  int label = 0;  // 1 = depressed, 0 = healthy
  FeatureSeq features;
};

struct SessionPrediction {
  std::string session_id;
  double probability = 0.0;
  int pred = 0;
  int label = 0;
};

struct SeedReport {
  int seed = 0;
  double f1 = 0.0;
  std::vector<SessionPrediction> predictions;  // dev split
};

struct DepressionTrainConfig {
  int epochs = 100;
  int batch_size = 8;
  int patience = 20;  // early stop on dev F1
  double lr = 1e-3;
  double clip_norm = 5.0;
  double threshold = 0.5;
  bool verbose = false;
};

namespace detail {

inline void check_split(const std::vector<SessionData>& train) {
  long depressed = 0, healthy = 0;
  for (const auto& s : train) (s.label == 1 ? depressed : healthy) += 1;
  if (depressed < 2 || healthy < 2)
    throw DegenerateSplit("training split has " + std::to_string(depressed) +
                          " depressed / " + std::to_string(healthy) +
                          " healthy sessions, need at least 2 of each");
}

template <class T>
std::vector<SessionPrediction> predict(const SessionClassifier<T>& model,
                                       const std::vector<SessionData>& sessions,
                                       double threshold) {
  std::vector<SessionPrediction> out;
  out.reserve(sessions.size());
  for (const auto& s : sessions) {
    SessionPrediction p;
    p.session_id = s.id;
    p.probability = model.probability(s.features);
    p.pred = p.probability >= threshold ? 1 : 0;
    p.label = s.label;
    out.push_back(std::move(p));
  }
  return out;
}

inline double f1_of(const std::vector<SessionPrediction>& preds) {
  std::vector<int> p, l;
  for (const auto& q : preds) {
    p.push_back(q.pred);
    l.push_back(q.label);
  }
  return f1_depressed(p, l);
}

}  // namespace detail

template <class T>
struct DepressionTrainResult {
  SessionClassifier<T> model;
  SeedReport report;
  int epochs_run = 0;
};

// Binary cross-entropy training of one session classifier. Deterministic per
// seed: the seed drives parameter init and batch shuffling only.
template <class T>
DepressionTrainResult<T> train_depression(CellKind kind,
                                          const std::vector<SessionData>& train,
                                          const std::vector<SessionData>& dev,
                                          int seed, const DepressionTrainConfig& cfg) {
  if (train.empty() || dev.empty())
    throw EmptyDataset("train_depression: empty split");
  detail::check_split(train);
  const int dim = train.front().features.cols;

  DepressionTrainResult<T> result;
  result.model = SessionClassifier<T>::init(kind, dim, static_cast<std::uint64_t>(seed));
  auto& model = result.model;
  auto params = model.params();
  nn::Adam<T> opt(params, {static_cast<T>(cfg.lr)});
  std::mt19937_64 rng(static_cast<std::uint64_t>(seed) * 0x9e3779b97f4a7c15ull + 17);

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
        const auto& s = train[order[i]];
        std::vector<T> v(s.features.values.begin(), s.features.values.end());
        nn::Tensor<T> seq = nn::Tensor<T>::from(s.features.rows, s.features.cols, std::move(v));
        nn::Tensor<T> loss = nn::bce_with_logits(model.logit(seq),
                                                 std::vector<T>{static_cast<T>(s.label)});
        batch_loss = batch_loss.defined() ? nn::add(batch_loss, loss) : loss;
      }
      batch_loss = nn::scale(batch_loss, T(1) / static_cast<T>(b1 - b0));
      if (!std::isfinite(static_cast<double>(batch_loss.item())))
        throw NonFiniteLoss("train_depression: non-finite loss in epoch " +
                            std::to_string(epoch) + ", batch " +
                            std::to_string(b0 / cfg.batch_size));
      nn::backward(batch_loss);
      opt.clip_global_norm(cfg.clip_norm);
      opt.step();
      opt.zero_grad();
    }

    double f1 = detail::f1_of(detail::predict(model, dev, cfg.threshold));
    result.epochs_run = epoch + 1;
    if (cfg.verbose)
      std::fprintf(stderr, "[depression] seed %d epoch %d dev F1=%.4f\n", seed,
                   epoch + 1, f1);
    if (f1 > best) {
      best = f1;
      best_values.clear();
      for (const auto& p : params) best_values.push_back(p.value());
      since_best = 0;
    } else {
      ++since_best;
    }
    if (best >= 1.0 || since_best > cfg.patience) break;
  }

  for (std::size_t i = 0; i < params.size(); ++i) params[i].value() = best_values[i];
  result.report.seed = seed;
  result.report.predictions = detail::predict(model, dev, cfg.threshold);
  result.report.f1 = detail::f1_of(result.report.predictions);
  return result;
}

struct ExperimentReport {
  std::string modality;  // audio | text | emotion
  std::vector<SeedReport> seeds;
  double f1_max = 0.0;
  double f1_avg = 0.0;
  double f1_std = 0.0;

  int best_seed() const {
    int best = seeds.front().seed;
    double best_f1 = seeds.front().f1;
    for (const auto& s : seeds)
      if (s.f1 > best_f1) {
        best_f1 = s.f1;
        best = s.seed;
      }
    return best;
  }
};

// Runs train_depression for seeds 0..n-1 and aggregates MAX/AVG/STD
// (population). Seeds are independent, so they may run on worker threads;
// results are identical either way.
inline ExperimentReport multi_seed_protocol(CellKind kind,
                                            const std::vector<SessionData>& train,
                                            const std::vector<SessionData>& dev,
                                            int n_seeds, const DepressionTrainConfig& cfg,
                                            const std::string& modality,
                                            int jobs = 1) {
  if (n_seeds < 1) throw InvalidInput("multi_seed_protocol: n_seeds must be >= 1");
  ExperimentReport report;
  report.modality = modality;
  report.seeds.resize(n_seeds);

  auto run_one = [&](int seed) -> SeedReport {
    try {
      return train_depression<float>(kind, train, dev, seed, cfg).report;
    } catch (const Error& e) {
      throw Error(e.code(), "seed " + std::to_string(seed) + ": " + e.what());
    }
  };

  if (jobs <= 1) {
    for (int seed = 0; seed < n_seeds; ++seed) report.seeds[seed] = run_one(seed);
  } else {
    for (int base = 0; base < n_seeds; base += jobs) {
      int chunk = std::min(jobs, n_seeds - base);
      std::vector<std::future<SeedReport>> futs;
      futs.reserve(chunk);
      for (int k = 0; k < chunk; ++k)
        futs.push_back(std::async(std::launch::async, run_one, base + k));
      for (int k = 0; k < chunk; ++k) report.seeds[base + k] = futs[k].get();
    }
  }

  std::vector<double> f1s;
  for (const auto& s : report.seeds) f1s.push_back(s.f1);
  F1Aggregate agg = aggregate_f1(f1s);
  report.f1_max = agg.max;
  report.f1_avg = agg.avg;
  report.f1_std = agg.std_dev;
  return report;
}

}  // namespace emodep::depression
