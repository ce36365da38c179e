#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "emodep/nn/grad_check.hpp"
#include "emodep/nn/rnn.hpp"

using namespace emodep;
using nn::Tensor;
using Catch::Approx;

static Tensor<double> rand_seq(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  auto t = Tensor<double>::zeros(rows, cols);
  for (auto& v : t.value()) v = g(rng);
  return t;
}

TEST_CASE("lstm gradients validate against finite differences") {
  std::mt19937_64 rng(21);
  auto cell = nn::LstmCell<double>::init(3, 4, rng);
  auto seq = rand_seq(5, 3, rng);
  auto f = [&] { return nn::mean(cell.last_hidden(seq, false)); };
  CHECK(nn::grad_check(f, {cell.wx, cell.wh, cell.b}) < 1e-4);

  auto fr = [&] { return nn::sum(cell.last_hidden(seq, true)); };
  CHECK(nn::grad_check(fr, {cell.wx, cell.wh, cell.b}) < 1e-4);
}

TEST_CASE("gru gradients validate against finite differences") {
  std::mt19937_64 rng(22);
  auto cell = nn::GruCell<double>::init(3, 4, rng);
  auto seq = rand_seq(6, 3, rng);
  auto f = [&] { return nn::mean(cell.last_hidden(seq, false)); };
  CHECK(nn::grad_check(f, {cell.wx, cell.wh, cell.b}) < 1e-4);
}

TEST_CASE("single-step sequences read the same in both directions") {
  std::mt19937_64 rng(23);
  auto lstm = nn::LstmCell<double>::init(4, 5, rng);
  auto gru = nn::GruCell<double>::init(4, 5, rng);
  auto seq = rand_seq(1, 4, rng);
  CHECK(lstm.last_hidden(seq, false).value() == lstm.last_hidden(seq, true).value());
  CHECK(gru.last_hidden(seq, false).value() == gru.last_hidden(seq, true).value());
}

TEST_CASE("zero-weight cells keep the hidden state at zero") {
  nn::LstmCell<double> cell;
  cell.input_dim = 3;
  cell.hidden = 4;
  cell.wx = Tensor<double>::zeros(3, 16, true);
  cell.wh = Tensor<double>::zeros(4, 16, true);
  cell.b = Tensor<double>::zeros(1, 16, true);
  std::mt19937_64 rng(24);
  auto h = cell.last_hidden(rand_seq(7, 3, rng), false);
  for (double v : h.value()) CHECK(v == Approx(0.0));
}

TEST_CASE("bidirectional readout concatenates both final states") {
  std::mt19937_64 rng(25);
  auto fwd = nn::GruCell<double>::init(3, 4, rng);
  auto bwd = nn::GruCell<double>::init(3, 4, rng);
  auto seq = rand_seq(5, 3, rng);
  auto h = nn::bidi_last_hidden(fwd, bwd, seq);
  REQUIRE(h.rows() == 1);
  REQUIRE(h.cols() == 8);
  auto hf = fwd.last_hidden(seq, false);
  auto hb = bwd.last_hidden(seq, true);
  for (int i = 0; i < 4; ++i) {
    CHECK(h.value()[i] == Approx(hf.value()[i]));
    CHECK(h.value()[4 + i] == Approx(hb.value()[i]));
  }
}
