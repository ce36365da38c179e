#pragma once

// Minimal dense reverse-mode autodiff on 2-D row-major tensors.
//
// A Tensor<T> is a handle to a graph node; ops build the DAG eagerly and
// record a backward closure per node. backward(loss) topologically sorts the
// reachable subgraph and accumulates exact analytic gradients into every
// parent that requires them. Scalars are 1x1 tensors, vectors are 1xN.
// T is float for training and double for gradient checking and oracles.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "emodep/errors.hpp"

namespace emodep::nn {

template <class T>
struct Node {
  int rows = 0;
  int cols = 0;
  std::vector<T> value;
  std::vector<T> grad;  // allocated lazily, same size as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::size_t size() const { return value.size(); }
  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
  }
};

template <class T>
using NodePtr = std::shared_ptr<Node<T>>;

inline std::string shape_str(int r, int c) {
  return "(" + std::to_string(r) + "x" + std::to_string(c) + ")";
}

template <class T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(NodePtr<T> n) : n_(std::move(n)) {}

  static Tensor zeros(int rows, int cols, bool requires_grad = false) {
    auto n = std::make_shared<Node<T>>();
    n->rows = rows;
    n->cols = cols;
    n->value.assign(static_cast<std::size_t>(rows) * cols, T(0));
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  static Tensor full(int rows, int cols, T v) {
    Tensor t = zeros(rows, cols);
    std::fill(t.value().begin(), t.value().end(), v);
    return t;
  }

  static Tensor scalar(T v) { return full(1, 1, v); }

  static Tensor from(int rows, int cols, std::vector<T> v, bool requires_grad = false) {
    if (v.size() != static_cast<std::size_t>(rows) * cols)
      throw ShapeError("tensor init: " + std::to_string(v.size()) +
                       " values for shape " + shape_str(rows, cols));
    Tensor t = zeros(rows, cols, requires_grad);
    t.value() = std::move(v);
    return t;
  }

  bool defined() const { return n_ != nullptr; }
  int rows() const { return n_->rows; }
  int cols() const { return n_->cols; }
  std::size_t size() const { return n_->size(); }
  bool requires_grad() const { return n_->requires_grad; }
  void set_requires_grad(bool b) { n_->requires_grad = b; }

  std::vector<T>& value() { return n_->value; }
  const std::vector<T>& value() const { return n_->value; }
  std::vector<T>& grad() {
    n_->ensure_grad();
    return n_->grad;
  }
  const std::vector<T>& grad() const {
    n_->ensure_grad();
    return n_->grad;
  }
  void zero_grad() { n_->grad.assign(n_->value.size(), T(0)); }

  T item() const {
    if (size() != 1)
      throw ShapeError("item() on non-scalar tensor " + shape_str(rows(), cols()));
    return n_->value[0];
  }

  const NodePtr<T>& node() const { return n_; }

 private:
  NodePtr<T> n_;
};

namespace detail {

template <class T>
NodePtr<T> make_result(int rows, int cols, std::vector<NodePtr<T>> parents) {
  auto n = std::make_shared<Node<T>>();
  n->rows = rows;
  n->cols = cols;
  n->value.assign(static_cast<std::size_t>(rows) * cols, T(0));
  for (const auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
  n->parents = std::move(parents);
  return n;
}

// C(n x m) = A(n x k) * B(k x m), optionally accumulating into C.
template <class T>
void matmul_nn(const T* a, int n, int k, const T* b, int m, T* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + static_cast<std::size_t>(n) * m, T(0));
  for (int i = 0; i < n; ++i) {
    const T* arow = a + static_cast<std::size_t>(i) * k;
    T* crow = c + static_cast<std::size_t>(i) * m;
    for (int p = 0; p < k; ++p) {
      T av = arow[p];
      if (av == T(0)) continue;
      const T* brow = b + static_cast<std::size_t>(p) * m;
      for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// C(n x k) += A(n x m) * B(k x m)^T  (rows of A dotted with rows of B)
template <class T>
void matmul_nt_acc(const T* a, int n, int m, const T* b, int k, T* c) {
  for (int i = 0; i < n; ++i) {
    const T* arow = a + static_cast<std::size_t>(i) * m;
    T* crow = c + static_cast<std::size_t>(i) * k;
    for (int j = 0; j < k; ++j) {
      const T* brow = b + static_cast<std::size_t>(j) * m;
      T acc = T(0);
      for (int p = 0; p < m; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

// C(k x m) += A(n x k)^T * B(n x m)
template <class T>
void matmul_tn_acc(const T* a, int n, int k, const T* b, int m, T* c) {
  for (int i = 0; i < n; ++i) {
    const T* arow = a + static_cast<std::size_t>(i) * k;
    const T* brow = b + static_cast<std::size_t>(i) * m;
    for (int p = 0; p < k; ++p) {
      T av = arow[p];
      if (av == T(0)) continue;
      T* crow = c + static_cast<std::size_t>(p) * m;
      for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace detail

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: " + shape_str(a.rows(), a.cols()) + " x " +
                     shape_str(b.rows(), b.cols()));
  auto out = detail::make_result<T>(a.rows(), b.cols(), {a.node(), b.node()});
  detail::matmul_nn(a.value().data(), a.rows(), a.cols(), b.value().data(),
                    b.cols(), out->value.data(), false);
  out->backward = [](Node<T>& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      detail::matmul_nt_acc(self.grad.data(), self.rows, self.cols,
                            pb.value.data(), pa.cols, pa.grad.data());
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      detail::matmul_tn_acc(pa.value.data(), pa.rows, pa.cols,
                            self.grad.data(), self.cols, pb.grad.data());
    }
  };
  return Tensor<T>(out);
}

namespace detail {

template <class T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": " + shape_str(a.rows(), a.cols()) +
                     " vs " + shape_str(b.rows(), b.cols()));
}

}  // namespace detail

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  detail::check_same_shape(a, b, "add");
  auto out = detail::make_result<T>(a.rows(), a.cols(), {a.node(), b.node()});
  for (std::size_t i = 0; i < out->size(); ++i)
    out->value[i] = a.value()[i] + b.value()[i];
  out->backward = [](Node<T>& self) {
    for (int p = 0; p < 2; ++p) {
      auto& par = *self.parents[p];
      if (!par.requires_grad) continue;
      par.ensure_grad();
      for (std::size_t i = 0; i < self.size(); ++i) par.grad[i] += self.grad[i];
    }
  };
  return Tensor<T>(out);
}

template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  detail::check_same_shape(a, b, "sub");
  auto out = detail::make_result<T>(a.rows(), a.cols(), {a.node(), b.node()});
  for (std::size_t i = 0; i < out->size(); ++i)
    out->value[i] = a.value()[i] - b.value()[i];
  out->backward = [](Node<T>& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (std::size_t i = 0; i < self.size(); ++i) pa.grad[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (std::size_t i = 0; i < self.size(); ++i) pb.grad[i] -= self.grad[i];
    }
  };
  return Tensor<T>(out);
}

template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::check_same_shape(a, b, "mul");
  auto out = detail::make_result<T>(a.rows(), a.cols(), {a.node(), b.node()});
  for (std::size_t i = 0; i < out->size(); ++i)
    out->value[i] = a.value()[i] * b.value()[i];
  out->backward = [](Node<T>& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (std::size_t i = 0; i < self.size(); ++i)
        pa.grad[i] += self.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (std::size_t i = 0; i < self.size(); ++i)
        pb.grad[i] += self.grad[i] * pa.value[i];
    }
  };
  return Tensor<T>(out);
}

// Elementwise a*x + b with scalar constants.
template <class T>
Tensor<T> affine(const Tensor<T>& x, T a, T b) {
  auto out = detail::make_result<T>(x.rows(), x.cols(), {x.node()});
  for (std::size_t i = 0; i < out->size(); ++i)
    out->value[i] = a * x.value()[i] + b;
  out->backward = [a](Node<T>& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    for (std::size_t i = 0; i < self.size(); ++i) p.grad[i] += a * self.grad[i];
  };
  return Tensor<T>(out);
}

template <class T>
Tensor<T> scale(const Tensor<T>& x, T a) {
  return affine(x, a, T(0));
}

// x (n x m) plus a 1 x m bias row broadcast over rows.
template <class T>
Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols())
    throw ShapeError("add_bias: " + shape_str(x.rows(), x.cols()) + " + " +
                     shape_str(bias.rows(), bias.cols()));
  auto out = detail::make_result<T>(x.rows(), x.cols(), {x.node(), bias.node()});
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j)
      out->value[static_cast<std::size_t>(i) * x.cols() + j] =
          x.value()[static_cast<std::size_t>(i) * x.cols() + j] + bias.value()[j];
  out->backward = [](Node<T>& self) {
    auto& px = *self.parents[0];
    auto& pb = *self.parents[1];
    if (px.requires_grad) {
      px.ensure_grad();
      for (std::size_t i = 0; i < self.size(); ++i) px.grad[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (int i = 0; i < self.rows; ++i)
        for (int j = 0; j < self.cols; ++j)
          pb.grad[j] += self.grad[static_cast<std::size_t>(i) * self.cols + j];
    }
  };
  return Tensor<T>(out);
}

template <class T>
Tensor<T> concat_cols(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rows() != b.rows())
    throw ShapeError("concat_cols: " + shape_str(a.rows(), a.cols()) + " | " +
                     shape_str(b.rows(), b.cols()));
  const int ca = a.cols(), cb = b.cols();
  auto out = detail::make_result<T>(a.rows(), ca + cb, {a.node(), b.node()});
  for (int i = 0; i < a.rows(); ++i) {
    std::copy_n(a.value().data() + static_cast<std::size_t>(i) * ca, ca,
                out->value.data() + static_cast<std::size_t>(i) * (ca + cb));
    std::copy_n(b.value().data() + static_cast<std::size_t>(i) * cb, cb,
                out->value.data() + static_cast<std::size_t>(i) * (ca + cb) + ca);
  }
  out->backward = [ca, cb](Node<T>& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    for (int i = 0; i < self.rows; ++i) {
      const T* g = self.grad.data() + static_cast<std::size_t>(i) * (ca + cb);
      if (pa.requires_grad) {
        pa.ensure_grad();
        T* ga = pa.grad.data() + static_cast<std::size_t>(i) * ca;
        for (int j = 0; j < ca; ++j) ga[j] += g[j];
      }
      if (pb.requires_grad) {
        pb.ensure_grad();
        T* gb = pb.grad.data() + static_cast<std::size_t>(i) * cb;
        for (int j = 0; j < cb; ++j) gb[j] += g[ca + j];
      }
    }
  };
  return Tensor<T>(out);
}

template <class T>
Tensor<T> concat_rows(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.cols() != b.cols())
    throw ShapeError("concat_rows: " + shape_str(a.rows(), a.cols()) + " / " +
                     shape_str(b.rows(), b.cols()));
  auto out = detail::make_result<T>(a.rows() + b.rows(), a.cols(), {a.node(), b.node()});
  std::copy(a.value().begin(), a.value().end(), out->value.begin());
  std::copy(b.value().begin(), b.value().end(), out->value.begin() + a.size());
  out->backward = [](Node<T>& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (std::size_t i = 0; i < pa.size(); ++i) pa.grad[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (std::size_t i = 0; i < pb.size(); ++i)
        pb.grad[i] += self.grad[pa.size() + i];
    }
  };
  return Tensor<T>(out);
}

template <class T>
Tensor<T> slice_rows(const Tensor<T>& x, int row0, int nrows) {
  if (row0 < 0 || nrows < 0 || row0 + nrows > x.rows())
    throw ShapeError("slice_rows: [" + std::to_string(row0) + ", " +
                     std::to_string(row0 + nrows) + ") of " +
                     shape_str(x.rows(), x.cols()));
  const int c = x.cols();
  auto out = detail::make_result<T>(nrows, c, {x.node()});
  std::copy_n(x.value().data() + static_cast<std::size_t>(row0) * c,
              static_cast<std::size_t>(nrows) * c, out->value.data());
  out->backward = [row0, c](Node<T>& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    T* g = p.grad.data() + static_cast<std::size_t>(row0) * c;
    for (std::size_t i = 0; i < self.size(); ++i) g[i] += self.grad[i];
  };
  return Tensor<T>(out);
}

template <class T>
Tensor<T> slice_cols(const Tensor<T>& x, int col0, int ncols) {
  if (col0 < 0 || ncols < 0 || col0 + ncols > x.cols())
    throw ShapeError("slice_cols: [" + std::to_string(col0) + ", " +
                     std::to_string(col0 + ncols) + ") of " +
                     shape_str(x.rows(), x.cols()));
  const int c = x.cols();
  auto out = detail::make_result<T>(x.rows(), ncols, {x.node()});
  for (int i = 0; i < x.rows(); ++i)
    std::copy_n(x.value().data() + static_cast<std::size_t>(i) * c + col0, ncols,
                out->value.data() + static_cast<std::size_t>(i) * ncols);
  out->backward = [col0, c](Node<T>& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    for (int i = 0; i < self.rows; ++i) {
      T* g = p.grad.data() + static_cast<std::size_t>(i) * c + col0;
      const T* gs = self.grad.data() + static_cast<std::size_t>(i) * self.cols;
      for (int j = 0; j < self.cols; ++j) g[j] += gs[j];
    }
  };
  return Tensor<T>(out);
}

template <class T>
Tensor<T> transpose(const Tensor<T>& x) {
  auto out = detail::make_result<T>(x.cols(), x.rows(), {x.node()});
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j)
      out->value[static_cast<std::size_t>(j) * x.rows() + i] =
          x.value()[static_cast<std::size_t>(i) * x.cols() + j];
  out->backward = [](Node<T>& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    for (int i = 0; i < self.rows; ++i)
      for (int j = 0; j < self.cols; ++j)
        p.grad[static_cast<std::size_t>(j) * self.rows + i] +=
            self.grad[static_cast<std::size_t>(i) * self.cols + j];
  };
  return Tensor<T>(out);
}

template <class T>
Tensor<T> reshape(const Tensor<T>& x, int rows, int cols) {
  if (static_cast<std::size_t>(rows) * cols != x.size())
    throw ShapeError("reshape: " + shape_str(x.rows(), x.cols()) + " -> " +
                     shape_str(rows, cols));
  auto out = detail::make_result<T>(rows, cols, {x.node()});
  out->value = x.value();
  out->backward = [](Node<T>& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    for (std::size_t i = 0; i < self.size(); ++i) p.grad[i] += self.grad[i];
  };
  return Tensor<T>(out);
}

namespace detail {

template <class T, class Fwd, class Dfd>
Tensor<T> unary_ew(const Tensor<T>& x, Fwd fwd, Dfd dfd) {
  auto out = make_result<T>(x.rows(), x.cols(), {x.node()});
  for (std::size_t i = 0; i < out->size(); ++i) out->value[i] = fwd(x.value()[i]);
  out->backward = [dfd](Node<T>& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    for (std::size_t i = 0; i < self.size(); ++i)
      p.grad[i] += self.grad[i] * dfd(p.value[i], self.value[i]);
  };
  return Tensor<T>(out);
}

}  // namespace detail

template <class T>
Tensor<T> tanh(const Tensor<T>& x) {
  return detail::unary_ew(
      x, [](T v) { return std::tanh(v); },
      [](T, T y) { return T(1) - y * y; });
}

template <class T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return detail::unary_ew(
      x, [](T v) { return T(1) / (T(1) + std::exp(-v)); },
      [](T, T y) { return y * (T(1) - y); });
}

template <class T>
Tensor<T> relu(const Tensor<T>& x) {
  return detail::unary_ew(
      x, [](T v) { return v > T(0) ? v : T(0); },
      [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <class T>
Tensor<T> log(const Tensor<T>& x) {
  return detail::unary_ew(
      x, [](T v) { return std::log(v); },
      [](T v, T) { return T(1) / v; });
}

// Row-wise softmax with max subtraction. Rows are nonnegative and sum to 1.
template <class T>
Tensor<T> softmax_rows(const Tensor<T>& x) {
  auto out = detail::make_result<T>(x.rows(), x.cols(), {x.node()});
  const int c = x.cols();
  for (int i = 0; i < x.rows(); ++i) {
    const T* in = x.value().data() + static_cast<std::size_t>(i) * c;
    T* o = out->value.data() + static_cast<std::size_t>(i) * c;
    T mx = in[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, in[j]);
    T sum = T(0);
    for (int j = 0; j < c; ++j) {
      o[j] = std::exp(in[j] - mx);
      sum += o[j];
    }
    for (int j = 0; j < c; ++j) o[j] /= sum;
  }
  out->backward = [](Node<T>& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    const int c = self.cols;
    for (int i = 0; i < self.rows; ++i) {
      const T* y = self.value.data() + static_cast<std::size_t>(i) * c;
      const T* gy = self.grad.data() + static_cast<std::size_t>(i) * c;
      T* gx = p.grad.data() + static_cast<std::size_t>(i) * c;
      T dot = T(0);
      for (int j = 0; j < c; ++j) dot += gy[j] * y[j];
      for (int j = 0; j < c; ++j) gx[j] += y[j] * (gy[j] - dot);
    }
  };
  return Tensor<T>(out);
}

template <class T>
Tensor<T> sum(const Tensor<T>& x) {
  auto out = detail::make_result<T>(1, 1, {x.node()});
  T acc = T(0);
  for (T v : x.value()) acc += v;
  out->value[0] = acc;
  out->backward = [](Node<T>& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    for (std::size_t i = 0; i < p.size(); ++i) p.grad[i] += self.grad[0];
  };
  return Tensor<T>(out);
}

template <class T>
Tensor<T> mean(const Tensor<T>& x) {
  auto out = detail::make_result<T>(1, 1, {x.node()});
  T acc = T(0);
  for (T v : x.value()) acc += v;
  const T inv = T(1) / static_cast<T>(x.size());
  out->value[0] = acc * inv;
  out->backward = [inv](Node<T>& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    for (std::size_t i = 0; i < p.size(); ++i) p.grad[i] += self.grad[0] * inv;
  };
  return Tensor<T>(out);
}

// Mean cross entropy of row-wise logits against integer class labels,
// computed via log-sum-exp. Backward is (softmax - onehot) / n.
template <class T>
Tensor<T> softmax_cross_entropy(const Tensor<T>& logits, const std::vector<int>& labels) {
  if (static_cast<int>(labels.size()) != logits.rows())
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                     " labels for " + shape_str(logits.rows(), logits.cols()));
  const int c = logits.cols();
  for (int y : labels)
    if (y < 0 || y >= c)
      throw InvalidInput("softmax_cross_entropy: label " + std::to_string(y) +
                         " out of range [0, " + std::to_string(c) + ")");
  auto out = detail::make_result<T>(1, 1, {logits.node()});
  T total = T(0);
  for (int i = 0; i < logits.rows(); ++i) {
    const T* in = logits.value().data() + static_cast<std::size_t>(i) * c;
    T mx = in[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, in[j]);
    T lse = T(0);
    for (int j = 0; j < c; ++j) lse += std::exp(in[j] - mx);
    lse = mx + std::log(lse);
    total += lse - in[labels[i]];
  }
  out->value[0] = total / static_cast<T>(logits.rows());
  out->backward = [labels](Node<T>& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    const int c = p.cols;
    const T inv = T(1) / static_cast<T>(p.rows);
    for (int i = 0; i < p.rows; ++i) {
      const T* in = p.value.data() + static_cast<std::size_t>(i) * c;
      T* g = p.grad.data() + static_cast<std::size_t>(i) * c;
      T mx = in[0];
      for (int j = 1; j < c; ++j) mx = std::max(mx, in[j]);
      T sum = T(0);
      for (int j = 0; j < c; ++j) sum += std::exp(in[j] - mx);
      for (int j = 0; j < c; ++j) {
        T soft = std::exp(in[j] - mx) / sum;
        g[j] += self.grad[0] * inv * (soft - (j == labels[i] ? T(1) : T(0)));
      }
    }
  };
  return Tensor<T>(out);
}

// Sum of Huber losses of (pred - target): 0.5 r^2 for |r| <= delta, else
// delta * (|r| - 0.5 delta).
template <class T>
Tensor<T> huber_sum(const Tensor<T>& pred, const std::vector<T>& target, T delta) {
  if (target.size() != pred.size())
    throw ShapeError("huber_sum: " + std::to_string(target.size()) +
                     " targets for " + shape_str(pred.rows(), pred.cols()));
  auto out = detail::make_result<T>(1, 1, {pred.node()});
  T total = T(0);
  for (std::size_t i = 0; i < target.size(); ++i) {
    T r = pred.value()[i] - target[i];
    T a = std::abs(r);
    total += a <= delta ? T(0.5) * r * r : delta * (a - T(0.5) * delta);
  }
  out->value[0] = total;
  out->backward = [target, delta](Node<T>& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    for (std::size_t i = 0; i < target.size(); ++i) {
      T r = p.value[i] - target[i];
      T d = std::clamp(r, -delta, delta);
      p.grad[i] += self.grad[0] * d;
    }
  };
  return Tensor<T>(out);
}

// Mean binary cross entropy on logits, numerically stable:
//   max(x, 0) - x z + log(1 + exp(-|x|));  d/dx = sigmoid(x) - z.
template <class T>
Tensor<T> bce_with_logits(const Tensor<T>& logits, const std::vector<T>& targets) {
  if (targets.size() != logits.size())
    throw ShapeError("bce_with_logits: " + std::to_string(targets.size()) +
                     " targets for " + shape_str(logits.rows(), logits.cols()));
  auto out = detail::make_result<T>(1, 1, {logits.node()});
  T total = T(0);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    T x = logits.value()[i], z = targets[i];
    total += std::max(x, T(0)) - x * z + std::log1p(std::exp(-std::abs(x)));
  }
  out->value[0] = total / static_cast<T>(targets.size());
  out->backward = [targets](Node<T>& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    const T inv = T(1) / static_cast<T>(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
      T s = T(1) / (T(1) + std::exp(-p.value[i]));
      p.grad[i] += self.grad[0] * inv * (s - targets[i]);
    }
  };
  return Tensor<T>(out);
}

// Reverse-mode sweep from a scalar loss. Gradients accumulate into every
// reachable node with requires_grad; call zero_grad on parameters between
// steps.
template <class T>
void backward(const Tensor<T>& loss) {
  if (loss.size() != 1)
    throw ShapeError("backward: loss must be scalar, got " +
                     shape_str(loss.rows(), loss.cols()));
  // Iterative post-order DFS; reverse post-order processes every node after
  // all of its consumers.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node<T>* next = node->parents[idx++].get();
      if (next->requires_grad && visited.insert(next).second)
        stack.emplace_back(next, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss.node()->ensure_grad();
  loss.node()->grad[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward && n->requires_grad) {
      n->ensure_grad();
      n->backward(*n);
    }
  }
}

}  // namespace emodep::nn
