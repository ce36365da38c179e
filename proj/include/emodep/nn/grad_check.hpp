#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "emodep/errors.hpp"
#include "emodep/nn/tensor.hpp"

namespace emodep::nn {

// Central-finite-difference validation of reverse-mode gradients.
//
// `make_loss` rebuilds the forward graph from the current parameter values
// and returns the scalar loss. The relative error per coordinate is
//   |g_ad - g_fd| / max(1, |g_ad|, |g_fd|).
// When max_coords_per_param > 0, only a seeded random subset of coordinates
// per parameter is probed; the full sweep is quadratic in model size.
// Non-smooth points (relu/abs kinks) are the caller's responsibility to
// avoid; random inputs hit them with probability zero.
template <class F>
double grad_check(F&& make_loss, const std::vector<Tensor<double>>& params,
                  double eps = 1e-5, int max_coords_per_param = -1,
                  std::uint64_t seed = 1234) {
  Tensor<double> loss = make_loss();
  if (!std::isfinite(loss.item()))
    throw NonFiniteLoss("grad_check: loss is not finite");
  for (const auto& p : params) const_cast<Tensor<double>&>(p).zero_grad();
  backward(loss);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(p.grad());

  std::mt19937_64 rng(seed);
  double max_err = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& value = const_cast<Tensor<double>&>(params[pi]).value();
    std::vector<std::size_t> coords(value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (max_coords_per_param > 0 &&
        coords.size() > static_cast<std::size_t>(max_coords_per_param)) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(max_coords_per_param);
    }
    for (std::size_t ci : coords) {
      const double x = value[ci];
      value[ci] = x + eps;
      double f_plus = make_loss().item();
      value[ci] = x - eps;
      double f_minus = make_loss().item();
      value[ci] = x;
      if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
        throw NonFiniteLoss("grad_check: perturbed loss is not finite");
      double g_fd = (f_plus - f_minus) / (2.0 * eps);
      double g_ad = analytic[pi][ci];
      double err = std::abs(g_ad - g_fd) /
                   std::max({1.0, std::abs(g_ad), std::abs(g_fd)});
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

}  // namespace emodep::nn
