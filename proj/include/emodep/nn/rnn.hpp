#pragma once

#include <random>
#include <string>
#include <vector>

#include "emodep/nn/init.hpp"
#include "emodep/nn/tensor.hpp"

namespace emodep::nn {

// LSTM cell with fused gate weights, gate order (i, f, g, o).
template <class T>
struct LstmCell {
  int input_dim = 0;
  int hidden = 0;
  Tensor<T> wx;  // input_dim x 4H
  Tensor<T> wh;  // H x 4H
  Tensor<T> b;   // 1 x 4H

  static LstmCell init(int input_dim, int hidden, std::mt19937_64& rng) {
    LstmCell c;
    c.input_dim = input_dim;
    c.hidden = hidden;
    c.wx = xavier_uniform<T>(input_dim, 4 * hidden, rng);
    c.wh = xavier_uniform<T>(hidden, 4 * hidden, rng);
    c.b = zero_bias<T>(4 * hidden);
    return c;
  }

  void collect(const std::string& prefix, std::vector<std::pair<std::string, Tensor<T>>>& out) const {
    out.emplace_back(prefix + ".wx", wx);
    out.emplace_back(prefix + ".wh", wh);
    out.emplace_back(prefix + ".b", b);
  }

  // Final hidden state after consuming the whole sequence (optionally in
  // reverse temporal order).
  Tensor<T> last_hidden(const Tensor<T>& seq, bool reverse) const {
    const int steps = seq.rows();
    Tensor<T> h = Tensor<T>::zeros(1, hidden);
    Tensor<T> c = Tensor<T>::zeros(1, hidden);
    for (int s = 0; s < steps; ++s) {
      int t = reverse ? steps - 1 - s : s;
      Tensor<T> x = slice_rows(seq, t, 1);
      Tensor<T> z = add_bias(add(matmul(x, wx), matmul(h, wh)), b);
      Tensor<T> i = sigmoid(slice_cols(z, 0, hidden));
      Tensor<T> f = sigmoid(slice_cols(z, hidden, hidden));
      Tensor<T> g = nn::tanh(slice_cols(z, 2 * hidden, hidden));
      Tensor<T> o = sigmoid(slice_cols(z, 3 * hidden, hidden));
      c = add(mul(f, c), mul(i, g));
      h = mul(o, nn::tanh(c));
    }
    return h;
  }
};

// GRU cell, gate order (z, r, n); h' = (1 - z) * h + z * n.
template <class T>
struct GruCell {
  int input_dim = 0;
  int hidden = 0;
  Tensor<T> wx;  // input_dim x 3H
  Tensor<T> wh;  // H x 3H
  Tensor<T> b;   // 1 x 3H

  static GruCell init(int input_dim, int hidden, std::mt19937_64& rng) {
    GruCell c;
    c.input_dim = input_dim;
    c.hidden = hidden;
    c.wx = xavier_uniform<T>(input_dim, 3 * hidden, rng);
    c.wh = xavier_uniform<T>(hidden, 3 * hidden, rng);
    c.b = zero_bias<T>(3 * hidden);
    return c;
  }

  void collect(const std::string& prefix, std::vector<std::pair<std::string, Tensor<T>>>& out) const {
    out.emplace_back(prefix + ".wx", wx);
    out.emplace_back(prefix + ".wh", wh);
    out.emplace_back(prefix + ".b", b);
  }

  Tensor<T> last_hidden(const Tensor<T>& seq, bool reverse) const {
    const int steps = seq.rows();
    Tensor<T> h = Tensor<T>::zeros(1, hidden);
    for (int s = 0; s < steps; ++s) {
      int t = reverse ? steps - 1 - s : s;
      Tensor<T> x = slice_rows(seq, t, 1);
      Tensor<T> xz = add_bias(matmul(x, wx), b);
      Tensor<T> hz = matmul(h, slice_cols(wh, 0, 2 * hidden));
      Tensor<T> z = sigmoid(add(slice_cols(xz, 0, hidden), slice_cols(hz, 0, hidden)));
      Tensor<T> r = sigmoid(add(slice_cols(xz, hidden, hidden), slice_cols(hz, hidden, hidden)));
      Tensor<T> n = nn::tanh(add(slice_cols(xz, 2 * hidden, hidden),
                                 matmul(mul(r, h), slice_cols(wh, 2 * hidden, hidden))));
      h = add(mul(affine(z, T(-1), T(1)), h), mul(z, n));
    }
    return h;
  }
};

// Concatenated final states of a forward and a backward cell (1 x 2H).
template <class Cell, class T>
Tensor<T> bidi_last_hidden(const Cell& fwd, const Cell& bwd, const Tensor<T>& seq) {
  return concat_cols(fwd.last_hidden(seq, false), bwd.last_hidden(seq, true));
}

}  // namespace emodep::nn
