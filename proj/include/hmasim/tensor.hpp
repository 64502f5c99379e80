#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hmasim {

/// Dense row-major matrix of real values.
struct Tensor2D {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // length rows * cols

  Tensor2D() = default;
  Tensor2D(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  Tensor2D(std::size_t r, std::size_t c, std::vector<double> d)
      : rows(r), cols(c), data(std::move(d)) {
    if (data.size() != rows * cols) {
      throw std::invalid_argument("Tensor2D: data length must equal rows*cols");
    }
  }

  std::size_t size() const { return rows * cols; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const Tensor2D&, const Tensor2D&) = default;
};

/// Seeded uniform random tensor. Values are generated at binary32 precision
/// so they survive the 32-bit on-disk value encoding without loss. An optional
/// element drop probability produces sparse test data.
inline Tensor2D random_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed,
                              double sparsity = 0.0, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::bernoulli_distribution drop(sparsity > 0.0 ? sparsity : 0.0);
  Tensor2D t(rows, cols);
  for (auto& v : t.data) {
    if (sparsity > 0.0 && drop(rng)) continue;
    v = static_cast<double>(static_cast<float>(dist(rng)));
  }
  return t;
}

}  // namespace hmasim
