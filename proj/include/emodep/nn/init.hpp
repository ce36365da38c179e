#pragma once

#include <cmath>
#include <random>

#include "emodep/nn/tensor.hpp"

namespace emodep::nn {

// Xavier-uniform weight init: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
template <class T>
Tensor<T> xavier_uniform(int rows, int cols, std::mt19937_64& rng) {
  Tensor<T> t = Tensor<T>::zeros(rows, cols, /*requires_grad=*/true);
  const double a = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-a, a);
  for (auto& v : t.value()) v = static_cast<T>(dist(rng));
  return t;
}

template <class T>
Tensor<T> zero_bias(int cols) {
  return Tensor<T>::zeros(1, cols, /*requires_grad=*/true);
}

}  // namespace emodep::nn
