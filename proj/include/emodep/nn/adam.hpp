#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "emodep/errors.hpp"
#include "emodep/nn/tensor.hpp"

namespace emodep::nn {

template <class T>
struct AdamConfig {
  T lr = T(1e-3);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);
};

// Adam with bias correction over a fixed parameter list. Moment buffers are
// keyed by position, so the list must not change between steps.
template <class T>
class Adam {
 public:
  Adam(std::vector<Tensor<T>> params, AdamConfig<T> cfg = {})
      : params_(std::move(params)), cfg_(cfg) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m_[i].assign(params_[i].size(), T(0));
      v_[i].assign(params_[i].size(), T(0));
    }
  }

  long step_count() const { return t_; }
  const std::vector<Tensor<T>>& params() const { return params_; }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  // Scales all gradients so their global L2 norm is at most max_norm.
  // Returns the pre-clip norm.
  double clip_global_norm(double max_norm) {
    double sq = 0.0;
    for (auto& p : params_)
      for (T g : p.grad()) sq += static_cast<double>(g) * g;
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
      T s = static_cast<T>(max_norm / norm);
      for (auto& p : params_)
        for (T& g : p.grad()) g *= s;
    }
    return norm;
  }

  void step() {
    ++t_;
    const T bc1 = T(1) - std::pow(cfg_.beta1, static_cast<T>(t_));
    const T bc2 = T(1) - std::pow(cfg_.beta2, static_cast<T>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& val = params_[i].value();
      auto& grad = params_[i].grad();
      for (std::size_t j = 0; j < val.size(); ++j) {
        T g = grad[j];
        if (!std::isfinite(g))
          throw NonFiniteGradient("adam: non-finite gradient in parameter " +
                                  std::to_string(i) + " at element " +
                                  std::to_string(j));
        m_[i][j] = cfg_.beta1 * m_[i][j] + (T(1) - cfg_.beta1) * g;
        v_[i][j] = cfg_.beta2 * v_[i][j] + (T(1) - cfg_.beta2) * g * g;
        T mhat = m_[i][j] / bc1;
        T vhat = v_[i][j] / bc2;
        val[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

 private:
  std::vector<Tensor<T>> params_;
  AdamConfig<T> cfg_;
  std::vector<std::vector<T>> m_, v_;
  long t_ = 0;
};

}  // namespace emodep::nn
