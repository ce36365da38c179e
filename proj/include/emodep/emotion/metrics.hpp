#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "emodep/emotion/types.hpp"
#include "emodep/errors.hpp"

namespace emodep::emotion {

namespace detail {

inline void check_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw ShapeError(std::string(what) + ": " + std::to_string(a) +
                     " predictions vs " + std::to_string(b) + " labels");
}

}  // namespace detail

// Overall accuracy.
inline double weighted_accuracy(const std::vector<int>& preds, const std::vector<int>& labels) {
  detail::check_aligned(preds.size(), labels.size(), "weighted_accuracy");
  if (preds.empty()) throw EmptyDataset("weighted_accuracy: no samples");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hit += preds[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(preds.size());
}

// Unweighted mean of per-class recalls over classes present in the labels.
inline double unweighted_accuracy(const std::vector<int>& preds, const std::vector<int>& labels) {
  detail::check_aligned(preds.size(), labels.size(), "unweighted_accuracy");
  if (preds.empty()) throw EmptyDataset("unweighted_accuracy: no samples");
  std::map<int, std::pair<long, long>> per_class;  // label -> (hits, count)
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto& [hits, count] = per_class[labels[i]];
    ++count;
    hits += preds[i] == labels[i];
  }
  double acc = 0.0;
  for (const auto& [cls, hc] : per_class)
    acc += static_cast<double>(hc.first) / static_cast<double>(hc.second);
  return acc / static_cast<double>(per_class.size());
}

// Mean absolute error per attribute column.
inline std::array<double, 3> attribute_mae(const std::vector<std::array<float, 3>>& preds,
                                           const std::vector<std::array<float, 3>>& labels) {
  detail::check_aligned(preds.size(), labels.size(), "attribute_mae");
  if (preds.empty()) throw EmptyDataset("attribute_mae: no samples");
  std::array<double, 3> mae{};
  for (std::size_t i = 0; i < preds.size(); ++i)
    for (int d = 0; d < 3; ++d)
      mae[d] += std::abs(static_cast<double>(preds[i][d]) - labels[i][d]);
  for (int d = 0; d < 3; ++d) mae[d] /= static_cast<double>(preds.size());
  return mae;
}

// Binary accuracy over sign predictions (0 = negative, 1 = positive).
inline double binary_accuracy(const std::vector<int>& preds, const std::vector<int>& labels) {
  return weighted_accuracy(preds, labels);
}

// F1 of the positive class; 0 by convention when precision + recall = 0.
inline double f1_positive(const std::vector<int>& preds, const std::vector<int>& labels) {
  detail::check_aligned(preds.size(), labels.size(), "f1_positive");
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == 1 && labels[i] == 1) ++tp;
    if (preds[i] == 1 && labels[i] == 0) ++fp;
    if (preds[i] == 0 && labels[i] == 1) ++fn;
  }
  if (2 * tp + fp + fn == 0) return 0.0;
  return 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
}

struct EvalMetrics {
  Mode mode = Mode::iemocap;
  double wa = 0.0, ua = 0.0;
  std::array<double, 3> mae{};  // valence, activation, dominance
  double acc2 = 0.0, f1 = 0.0;

  // The model-selection scalar: UA for iemocap, Acc2 for mosei.
  double primary() const { return mode == Mode::iemocap ? ua : acc2; }
};

}  // namespace emodep::emotion
