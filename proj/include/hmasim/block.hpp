#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hmasim/fixed_point.hpp"
#include "hmasim/pruning.hpp"
#include "hmasim/sparse.hpp"
#include "hmasim/tensor.hpp"

namespace hmasim {

enum class Activation { relu, gelu };

/// Applies the format after every matrix-level operation; identity for fp32.
class Quantizer {
 public:
  explicit Quantizer(FixedPointFormat fmt) : fmt_(fmt) {}

  Tensor2D operator()(Tensor2D t) const {
    if (!fmt_.is_fp32()) {
      for (auto& v : t.data) v = quantize_value(v, fmt_);
    }
    return t;
  }

  FixedPointFormat format() const { return fmt_; }

 private:
  FixedPointFormat fmt_;
};

namespace linalg {

inline Tensor2D matmul(const Tensor2D& a, const Tensor2D& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimensions differ");
  Tensor2D out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) {
        out.at(i, j) += aik * b.at(k, j);
      }
    }
  }
  return out;
}

inline Tensor2D add_bias(Tensor2D t, const std::vector<double>& bias) {
  if (bias.size() != t.cols) throw std::invalid_argument("add_bias: bias length mismatch");
  for (std::size_t i = 0; i < t.rows; ++i) {
    for (std::size_t j = 0; j < t.cols; ++j) t.at(i, j) += bias[j];
  }
  return t;
}

inline Tensor2D add(const Tensor2D& a, const Tensor2D& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw std::invalid_argument("add: shape mismatch");
  Tensor2D out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out.data[k] += b.data[k];
  return out;
}

inline double activate(double x, Activation act) {
  if (act == Activation::relu) return x > 0.0 ? x : 0.0;
  return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
}

inline Tensor2D apply_activation(Tensor2D t, Activation act) {
  for (auto& v : t.data) v = activate(v, act);
  return t;
}

inline Tensor2D softmax_rows(Tensor2D t) {
  for (std::size_t i = 0; i < t.rows; ++i) {
    double mx = t.at(i, 0);
    for (std::size_t j = 1; j < t.cols; ++j) mx = std::max(mx, t.at(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < t.cols; ++j) {
      t.at(i, j) = std::exp(t.at(i, j) - mx);
      sum += t.at(i, j);
    }
    for (std::size_t j = 0; j < t.cols; ++j) t.at(i, j) /= sum;
  }
  return t;
}

inline Tensor2D layer_norm_rows(const Tensor2D& t, const std::vector<double>& gamma,
                                const std::vector<double>& beta, double eps) {
  if (gamma.size() != t.cols || beta.size() != t.cols) {
    throw std::invalid_argument("layer_norm: parameter length mismatch");
  }
  Tensor2D out(t.rows, t.cols);
  for (std::size_t i = 0; i < t.rows; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < t.cols; ++j) mean += t.at(i, j);
    mean /= static_cast<double>(t.cols);
    double var = 0.0;
    for (std::size_t j = 0; j < t.cols; ++j) {
      const double d = t.at(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(t.cols);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < t.cols; ++j) {
      out.at(i, j) = (t.at(i, j) - mean) * inv * gamma[j] + beta[j];
    }
  }
  return out;
}

}  // namespace linalg

/// Bottleneck adapter: down-projection, activation, up-projection, shortcut.
struct AdapterWeights {
  Tensor2D down_w;  // hidden x s
  std::vector<double> down_b;
  Tensor2D up_w;  // s x hidden
  std::vector<double> up_b;
};

struct LayerNormParams {
  std::vector<double> gamma;
  std::vector<double> beta;
};

/// Weights for one execution of the shared transformer layer plus its two
/// adapter slots. Attention and feed-forward matrices are the frozen
/// backbone; layer norms and adapters are the task-specific part.
struct BlockWeights {
  std::size_t num_heads = 4;
  Tensor2D wq, wk, wv, wo;  // hidden x hidden
  std::vector<double> bq, bk, bv, bo;
  Tensor2D ffn_in;  // hidden x ffn
  std::vector<double> ffn_in_b;
  Tensor2D ffn_out;  // ffn x hidden
  std::vector<double> ffn_out_b;
  LayerNormParams ln_attn, ln_ffn;
  AdapterWeights adapter1, adapter2;

  std::size_t hidden() const { return wq.rows; }

  static BlockWeights random(std::size_t hidden, std::size_t ffn, std::size_t heads,
                             std::size_t s1, std::size_t s2, std::uint64_t seed,
                             double scale = 0.3) {
    BlockWeights w;
    w.num_heads = heads;
    std::uint64_t salt = 0;
    const auto mat = [&](std::size_t r, std::size_t c) {
      return random_tensor(r, c, seed + 1315423911u * ++salt, 0.0, -scale, scale);
    };
    const auto vec = [&](std::size_t n) {
      const Tensor2D t = mat(1, n);
      return t.data;
    };
    w.wq = mat(hidden, hidden);
    w.wk = mat(hidden, hidden);
    w.wv = mat(hidden, hidden);
    w.wo = mat(hidden, hidden);
    w.bq = vec(hidden);
    w.bk = vec(hidden);
    w.bv = vec(hidden);
    w.bo = vec(hidden);
    w.ffn_in = mat(hidden, ffn);
    w.ffn_in_b = vec(ffn);
    w.ffn_out = mat(ffn, hidden);
    w.ffn_out_b = vec(hidden);
    w.ln_attn = {vec(hidden), vec(hidden)};
    w.ln_ffn = {vec(hidden), vec(hidden)};
    w.adapter1 = {mat(hidden, s1), vec(s1), mat(s1, hidden), vec(hidden)};
    w.adapter2 = {mat(hidden, s2), vec(s2), mat(s2, hidden), vec(hidden)};
    return w;
  }
};

/// x + Up(act(Down(x))): the adapter's shortcut keeps it an exact identity
/// whenever the up-projection (weights and bias) is zero.
inline Tensor2D adapter_forward(const Tensor2D& x, const AdapterWeights& w, Activation act,
                                const Quantizer& q = Quantizer(FixedPointFormat::fp32())) {
  if (x.cols != w.down_w.rows) throw std::invalid_argument("adapter_forward: shape mismatch");
  Tensor2D down = q(linalg::add_bias(linalg::matmul(x, w.down_w), w.down_b));
  down = q(linalg::apply_activation(std::move(down), act));
  const Tensor2D up = q(linalg::add_bias(linalg::matmul(down, w.up_w), w.up_b));
  return q(linalg::add(x, up));
}

namespace detail {

inline Tensor2D slice_cols(const Tensor2D& t, std::size_t begin, std::size_t count) {
  Tensor2D out(t.rows, count);
  for (std::size_t i = 0; i < t.rows; ++i) {
    for (std::size_t j = 0; j < count; ++j) out.at(i, j) = t.at(i, begin + j);
  }
  return out;
}

inline Tensor2D transpose(const Tensor2D& t) {
  Tensor2D out(t.cols, t.rows);
  for (std::size_t i = 0; i < t.rows; ++i) {
    for (std::size_t j = 0; j < t.cols; ++j) out.at(j, i) = t.at(i, j);
  }
  return out;
}

inline Tensor2D multi_head_attention(const Tensor2D& x, const BlockWeights& w,
                                     const Quantizer& q) {
  const std::size_t hidden = x.cols;
  if (hidden % w.num_heads != 0) {
    throw std::invalid_argument("attention: hidden not divisible by heads");
  }
  const std::size_t d = hidden / w.num_heads;
  const Tensor2D qm = q(linalg::add_bias(linalg::matmul(x, w.wq), w.bq));
  const Tensor2D km = q(linalg::add_bias(linalg::matmul(x, w.wk), w.bk));
  const Tensor2D vm = q(linalg::add_bias(linalg::matmul(x, w.wv), w.bv));

  Tensor2D context(x.rows, hidden);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t h = 0; h < w.num_heads; ++h) {
    const Tensor2D qh = slice_cols(qm, h * d, d);
    const Tensor2D kh = slice_cols(km, h * d, d);
    const Tensor2D vh = slice_cols(vm, h * d, d);
    Tensor2D scores = linalg::matmul(qh, transpose(kh));
    for (auto& v : scores.data) v *= inv_sqrt_d;
    scores = q(std::move(scores));
    const Tensor2D probs = q(linalg::softmax_rows(std::move(scores)));
    const Tensor2D ctx = q(linalg::matmul(probs, vh));
    for (std::size_t i = 0; i < x.rows; ++i) {
      for (std::size_t j = 0; j < d; ++j) context.at(i, h * d + j) = ctx.at(i, j);
    }
  }
  return q(linalg::add_bias(linalg::matmul(context, w.wo), w.bo));
}

}  // namespace detail

/// One shared-layer pass in the inset order: attention, adapter, layer norm,
/// feed-forward, adapter, layer norm (post-norm residual structure). In a
/// fixed-point format every matrix-level result is re-quantized; accumulation
/// itself runs at full precision.
inline Tensor2D block_forward(const Tensor2D& x, const BlockWeights& w, FixedPointFormat fmt,
                              Activation act = Activation::gelu, double ln_eps = 1e-12) {
  if (x.cols != w.hidden()) throw std::invalid_argument("block_forward: input width mismatch");
  const Quantizer q(fmt);
  const Tensor2D attn = detail::multi_head_attention(x, w, q);
  const Tensor2D a1 = adapter_forward(attn, w.adapter1, act, q);
  const Tensor2D h1 =
      q(linalg::layer_norm_rows(linalg::add(x, a1), w.ln_attn.gamma, w.ln_attn.beta, ln_eps));

  Tensor2D mid = q(linalg::add_bias(linalg::matmul(h1, w.ffn_in), w.ffn_in_b));
  mid = q(linalg::apply_activation(std::move(mid), act));
  const Tensor2D ffn = q(linalg::add_bias(linalg::matmul(mid, w.ffn_out), w.ffn_out_b));
  const Tensor2D a2 = adapter_forward(ffn, w.adapter2, act, q);
  return q(linalg::layer_norm_rows(linalg::add(h1, a2), w.ln_ffn.gamma, w.ln_ffn.beta, ln_eps));
}

struct SparseEquivalenceReport {
  double max_abs_deviation = 0.0;
  bool weights_identical = true;  // decoded weights matched the pruned originals
  std::size_t faults_injected = 0;
};

/// Prune, encode, decode, and run the block both ways; the codec must not
/// change a single output bit. An optional bitmask fault (one flipped bit in
/// the first matrix that can absorb it) demonstrates how encoding errors
/// propagate; with a fault the decode runs in zero-fill mode.
inline SparseEquivalenceReport sparse_equivalence_check(
    const BlockWeights& w, std::uint64_t seed, double sparsity = 0.5,
    FixedPointFormat fmt = FixedPointFormat::fp32(),
    std::optional<std::size_t> corrupt_bitmask_bit = std::nullopt) {
  const Tensor2D x = random_tensor(8, w.hidden(), seed, 0.0, -1.0, 1.0);

  BlockWeights pruned = w;
  Tensor2D* mats[] = {&pruned.wq,     &pruned.wk,      &pruned.wv,
                      &pruned.wo,     &pruned.ffn_in,  &pruned.ffn_out,
                      &pruned.adapter1.down_w, &pruned.adapter1.up_w,
                      &pruned.adapter2.down_w, &pruned.adapter2.up_w};
  for (Tensor2D* m : mats) *m = prune_magnitude(*m, sparsity);

  BlockWeights decoded = pruned;
  Tensor2D* dmats[] = {&decoded.wq,     &decoded.wk,      &decoded.wv,
                       &decoded.wo,     &decoded.ffn_in,  &decoded.ffn_out,
                       &decoded.adapter1.down_w, &decoded.adapter1.up_w,
                       &decoded.adapter2.down_w, &decoded.adapter2.up_w};
  SparseEquivalenceReport report;
  std::optional<std::size_t> fault = corrupt_bitmask_bit;
  const DeficitPolicy policy = fault ? DeficitPolicy::zero_fill : DeficitPolicy::error;
  for (Tensor2D* m : dmats) {
    SparseTensor enc = bitmask_encode(*m);
    if (fault && *fault < enc.bit_count()) {
      enc.flip_bit(*fault);
      fault.reset();
      ++report.faults_injected;
    }
    *m = bitmask_decode(enc, policy);
  }

  for (std::size_t i = 0; i < std::size(mats); ++i) {
    if (!(*mats[i] == *dmats[i])) report.weights_identical = false;
  }

  const Tensor2D y_dense = block_forward(x, pruned, fmt);
  const Tensor2D y_codec = block_forward(x, decoded, fmt);
  for (std::size_t k = 0; k < y_dense.size(); ++k) {
    report.max_abs_deviation =
        std::max(report.max_abs_deviation, std::abs(y_dense.data[k] - y_codec.data[k]));
  }
  return report;
}

}  // namespace hmasim
