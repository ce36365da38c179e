#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "emodep/nn/adam.hpp"
#include "emodep/nn/checkpoint.hpp"
#include "emodep/nn/grad_check.hpp"
#include "emodep/nn/init.hpp"
#include "emodep/nn/tensor.hpp"
#include "test_util.hpp"

using namespace emodep;
using nn::Tensor;
using Catch::Approx;

static Tensor<double> randt(int r, int c, std::mt19937_64& rng, bool grad = true,
                            double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Tensor<double> t = Tensor<double>::zeros(r, c, grad);
  for (auto& v : t.value()) v = g(rng);
  return t;
}

TEST_CASE("softmax of a constant row is uniform and rows sum to one") {
  auto x = Tensor<double>::full(1, 4, 2.5);
  auto y = nn::softmax_rows(x);
  for (double v : y.value()) CHECK(v == Approx(0.25));

  std::mt19937_64 rng(1);
  auto z = nn::softmax_rows(randt(6, 9, rng));
  for (int i = 0; i < 6; ++i) {
    double sum = 0.0;
    for (int j = 0; j < 9; ++j) {
      double v = z.value()[i * 9 + j];
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("tanh derivative at zero is exactly one") {
  auto x = Tensor<double>::zeros(1, 1, true);
  auto y = nn::tanh(x);
  nn::backward(y);
  CHECK(x.grad()[0] == Approx(1.0));
}

TEST_CASE("incompatible matmul names both shapes") {
  auto a = Tensor<double>::zeros(2, 3);
  auto b = Tensor<double>::zeros(4, 2);
  CHECK_THROWS_MATCHES(nn::matmul(a, b), ShapeError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("(2x3)") &&
                           Catch::Matchers::ContainsSubstring("(4x2)")));
}

TEST_CASE("matmul forward against hand-computed product") {
  auto a = Tensor<double>::from(2, 3, {1, 2, 3, 4, 5, 6});
  auto b = Tensor<double>::from(3, 2, {7, 8, 9, 10, 11, 12});
  auto c = nn::matmul(a, b);
  CHECK(c.value() == std::vector<double>{58, 64, 139, 154});
}

TEST_CASE("every differentiable op passes grad_check at random points") {
  std::mt19937_64 rng(42);

  SECTION("matmul + bias + tanh chain") {
    auto w = randt(4, 3, rng);
    auto b = randt(1, 3, rng);
    auto x = randt(2, 4, rng, false);
    auto f = [&] { return nn::mean(nn::tanh(nn::add_bias(nn::matmul(x, w), b))); };
    CHECK(nn::grad_check(f, {w, b}) < 1e-4);
  }
  SECTION("sigmoid / log / softmax composite") {
    auto w = randt(3, 5, rng);
    auto f = [&] {
      return nn::mean(nn::log(nn::sigmoid(nn::softmax_rows(w))));
    };
    CHECK(nn::grad_check(f, {w}) < 1e-4);
  }
  SECTION("relu shifted away from the kink") {
    auto w = randt(3, 4, rng);
    for (auto& v : w.value()) v += v > 0 ? 0.5 : -0.5;
    auto f = [&] { return nn::sum(nn::relu(w)); };
    CHECK(nn::grad_check(f, {w}) < 1e-4);
  }
  SECTION("concat, slice, transpose, reshape, elementwise mul") {
    auto a = randt(3, 2, rng);
    auto b = randt(3, 3, rng);
    auto f = [&] {
      auto cat = nn::concat_cols(a, b);                       // 3 x 5
      auto sl = nn::slice_cols(nn::slice_rows(cat, 1, 2), 1, 3);  // 2 x 3
      auto tr = nn::transpose(sl);                            // 3 x 2
      auto rs = nn::reshape(tr, 2, 3);
      return nn::mean(nn::mul(rs, rs));
    };
    CHECK(nn::grad_check(f, {a, b}) < 1e-4);
  }
  SECTION("concat_rows and affine") {
    auto a = randt(2, 3, rng);
    auto b = randt(4, 3, rng);
    auto f = [&] {
      return nn::sum(nn::affine(nn::concat_rows(a, b), 1.5, -0.25));
    };
    CHECK(nn::grad_check(f, {a, b}) < 1e-4);
  }
  SECTION("softmax cross entropy") {
    auto logits = randt(3, 4, rng);
    std::vector<int> labels = {2, 0, 3};
    auto f = [&] { return nn::softmax_cross_entropy(logits, labels); };
    CHECK(nn::grad_check(f, {logits}) < 1e-4);
  }
  SECTION("huber away from the corner") {
    auto pred = randt(1, 3, rng);
    std::vector<double> target = {0.2, -0.4, 3.0};
    auto f = [&] { return nn::huber_sum(pred, target, 1.0); };
    CHECK(nn::grad_check(f, {pred}) < 1e-4);
  }
  SECTION("bce with logits") {
    auto logits = randt(1, 4, rng);
    std::vector<double> targets = {1.0, 0.0, 1.0, 0.0};
    auto f = [&] { return nn::bce_with_logits(logits, targets); };
    CHECK(nn::grad_check(f, {logits}) < 1e-4);
  }
  SECTION("two-layer tanh network, 20 random restarts") {
    for (int trial = 0; trial < 20; ++trial) {
      auto w1 = randt(3, 4, rng);
      auto w2 = randt(4, 1, rng);
      auto x = randt(1, 3, rng, false);
      auto f = [&] {
        return nn::mean(nn::tanh(nn::matmul(nn::tanh(nn::matmul(x, w1)), w2)));
      };
      CHECK(nn::grad_check(f, {w1, w2}) < 1e-4);
    }
  }
}

TEST_CASE("gradient accumulation is linear over subgraph sums") {
  std::mt19937_64 rng(9);
  auto w = randt(3, 3, rng);
  auto x = randt(2, 3, rng, false);

  auto loss1 = [&] { return nn::mean(nn::tanh(nn::matmul(x, w))); };
  auto loss2 = [&] { return nn::sum(nn::sigmoid(nn::matmul(x, w))); };

  w.zero_grad();
  nn::backward(nn::add(loss1(), loss2()));
  auto combined = w.grad();

  w.zero_grad();
  nn::backward(loss1());
  nn::backward(loss2());  // accumulates on top
  auto separate = w.grad();

  for (std::size_t i = 0; i < combined.size(); ++i)
    CHECK(combined[i] == Approx(separate[i]).margin(1e-12));
}

TEST_CASE("backward requires a scalar") {
  auto x = Tensor<double>::zeros(2, 2, true);
  CHECK_THROWS_AS(nn::backward(x), ShapeError);
}

TEST_CASE("adam: zero gradient is a fixed point") {
  auto p = Tensor<float>::from(1, 3, {1.0f, -2.0f, 3.0f}, true);
  nn::Adam<float> opt({p});
  p.zero_grad();
  opt.step();
  CHECK(p.value() == std::vector<float>{1.0f, -2.0f, 3.0f});
}

TEST_CASE("adam single step on f(x) = x moves by about -lr") {
  // One step with grad 1 from x = 0: m-hat = v-hat = 1, so
  // x <- -lr / (1 + eps) = -0.0999999990...
  auto p = Tensor<float>::zeros(1, 1, true);
  nn::AdamConfig<float> cfg;
  cfg.lr = 0.1f;
  nn::Adam<float> opt({p}, cfg);
  p.grad()[0] = 1.0f;
  opt.step();
  CHECK(p.value()[0] == Approx(-0.1).epsilon(1e-5));
  CHECK(opt.step_count() == 1);
}

TEST_CASE("adam rejects non-finite gradients") {
  auto p = Tensor<float>::zeros(1, 2, true);
  nn::Adam<float> opt({p});
  p.grad()[1] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(opt.step(), NonFiniteGradient);
}

TEST_CASE("identical seeds give bit-identical short training runs") {
  auto run = [] {
    std::mt19937_64 rng(77);
    auto w = nn::xavier_uniform<float>(4, 4, rng);
    auto x = Tensor<float>::from(1, 4, {0.3f, -0.2f, 0.9f, 0.1f});
    nn::Adam<float> opt({w});
    for (int i = 0; i < 25; ++i) {
      auto loss = nn::mean(nn::mul(nn::matmul(x, w), nn::matmul(x, w)));
      nn::backward(loss);
      opt.step();
      opt.zero_grad();
    }
    return w.value();
  };
  CHECK(run() == run());
}

TEST_CASE("gradient clipping caps the global norm") {
  auto a = Tensor<float>::zeros(1, 2, true);
  auto b = Tensor<float>::zeros(1, 2, true);
  a.grad() = {3.0f, 0.0f};
  b.grad() = {0.0f, 4.0f};
  nn::Adam<float> opt({a, b});
  double norm = opt.clip_global_norm(1.0);
  CHECK(norm == Approx(5.0));
  double after = std::sqrt(a.grad()[0] * a.grad()[0] + b.grad()[1] * b.grad()[1]);
  CHECK(after == Approx(1.0).epsilon(1e-5));
}

TEST_CASE("checkpoint round trip preserves names, shapes, bits and hash") {
  TempDir tmp("ckpt");
  std::mt19937_64 rng(13);
  nn::NamedParams params;
  params.emplace_back("layer.w", nn::xavier_uniform<float>(7, 5, rng));
  params.emplace_back("layer.b", Tensor<float>::from(1, 5, {1, 2, 3, 4, 5}));

  std::string path = tmp.str("model.ckpt");
  nn::save_checkpoint(path, params);
  auto ck = nn::load_checkpoint(path);
  REQUIRE(ck.params.size() == 2);
  CHECK(ck.params[0].first == "layer.w");
  CHECK(ck.params[0].second.value() == params[0].second.value());
  CHECK(ck.params[1].second.value() == params[1].second.value());
  CHECK(ck.hash == nn::content_hash(params));

  // load_into verifies names and shapes
  nn::NamedParams wrong_name;
  wrong_name.emplace_back("layer.weight", Tensor<float>::zeros(7, 5));
  wrong_name.emplace_back("layer.b", Tensor<float>::zeros(1, 5));
  CHECK_THROWS_AS(nn::load_into(ck, wrong_name), InvalidInput);

  nn::NamedParams wrong_shape;
  wrong_shape.emplace_back("layer.w", Tensor<float>::zeros(5, 7));
  wrong_shape.emplace_back("layer.b", Tensor<float>::zeros(1, 5));
  CHECK_THROWS_AS(nn::load_into(ck, wrong_shape), InvalidInput);
}

TEST_CASE("truncated or corrupted checkpoints raise ChecksumError") {
  TempDir tmp("ckpt2");
  nn::NamedParams params;
  params.emplace_back("w", Tensor<float>::from(2, 2, {1, 2, 3, 4}));
  std::string path = tmp.str("m.ckpt");
  nn::save_checkpoint(path, params);

  auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 5);
  CHECK_THROWS_AS(nn::load_checkpoint(path), ChecksumError);

  nn::save_checkpoint(path, params);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(20);
    char junk = 0x5a;
    f.write(&junk, 1);
  }
  CHECK_THROWS_AS(nn::load_checkpoint(path), ChecksumError);
}

TEST_CASE("grad_check flags a non-finite loss") {
  auto w = Tensor<double>::from(1, 1, {-1.0}, true);
  auto f = [&] { return nn::log(w); };  // log of a negative value
  CHECK_THROWS_AS(nn::grad_check(f, {w}), NonFiniteLoss);
}
