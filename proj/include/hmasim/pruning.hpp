#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hmasim/model.hpp"
#include "hmasim/tensor.hpp"

namespace hmasim {

/// Number of elements a magnitude prune at the given sparsity removes from a
/// population of n. Shared with the footprint model so storage sizing and the
/// actual pruning agree element-for-element.
inline std::uint64_t pruned_zero_count(double sparsity, std::uint64_t n) {
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) {
    throw std::invalid_argument("sparsity must lie in [0, 1]");
  }
  return static_cast<std::uint64_t>(std::floor(sparsity * static_cast<double>(n)));
}

inline std::uint64_t nonzero_after_pruning(double sparsity, std::uint64_t n) {
  return n - pruned_zero_count(sparsity, n);
}

/// Global magnitude pruning: zero exactly floor(sparsity*n) elements of
/// smallest absolute value, breaking magnitude ties toward the lower flat
/// index. Everything else is untouched.
inline Tensor2D prune_magnitude(const Tensor2D& t, double sparsity) {
  const std::uint64_t k = pruned_zero_count(sparsity, t.size());
  Tensor2D out = t;
  if (k == 0) return out;
  std::vector<std::size_t> order(t.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(t.data[a]) < std::abs(t.data[b]);
  });
  for (std::uint64_t i = 0; i < k; ++i) out.data[order[i]] = 0.0;
  return out;
}

/// One measured pruning configuration: per-partition sparsities and the
/// accuracy the pruned model achieved.
struct SparsityPoint {
  double s_embd = 0.0;
  double s_tf = 0.0;
  double accuracy = 0.0;

  friend bool operator==(const SparsityPoint&, const SparsityPoint&) = default;
};

/// Whole-model sparsity as the parameter-weighted mix of the embedding and
/// transformer sparsities.
inline double cumulative_sparsity(double s_embd, double s_tf, double p_embd, double p_tf) {
  for (double v : {s_embd, s_tf}) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("sparsity must lie in [0, 1]");
  }
  return s_embd * p_embd + s_tf * p_tf;
}

inline double cumulative_sparsity(double s_embd, double s_tf, const PartitionedCounts& p) {
  return cumulative_sparsity(s_embd, s_tf, p.p_embd(), p.p_tf());
}

/// Highest sparsity on a measured (sparsity, accuracy) curve whose accuracy
/// still meets the baseline; 0 when nothing qualifies (the un-pruned model is
/// the safe fallback).
inline double find_csp_1d(const std::vector<std::pair<double, double>>& curve, double baseline) {
  if (curve.empty()) throw std::invalid_argument("find_csp_1d: empty curve");
  double best = 0.0;
  for (const auto& [sparsity, accuracy] : curve) {
    if (accuracy >= baseline && sparsity > best) best = sparsity;
  }
  return best;
}

struct CspResult {
  SparsityPoint point;
  double cumulative = 0.0;
  bool fallback = false;  // nothing on the grid met the baseline
};

/// Grid search for the critical sparsity point: among points meeting the
/// baseline, pick the one with the highest cumulative sparsity; ties prefer
/// higher accuracy, then lower embedding sparsity. With no qualifying point
/// the un-pruned (0,0) configuration is returned, flagged as a fallback; its
/// accuracy defaults to the baseline (the un-pruned model defines it) unless
/// the grid carries an explicit (0,0) row.
inline CspResult find_csp_2d(const std::vector<SparsityPoint>& grid, double baseline,
                             double p_embd, double p_tf) {
  if (grid.empty()) throw std::invalid_argument("find_csp_2d: empty grid");
  const SparsityPoint* best = nullptr;
  double best_sc = 0.0;
  for (const SparsityPoint& pt : grid) {
    if (pt.accuracy < baseline) continue;
    const double sc = cumulative_sparsity(pt.s_embd, pt.s_tf, p_embd, p_tf);
    if (best == nullptr || sc > best_sc ||
        (sc == best_sc && (pt.accuracy > best->accuracy ||
                           (pt.accuracy == best->accuracy && pt.s_embd < best->s_embd)))) {
      best = &pt;
      best_sc = sc;
    }
  }
  if (best != nullptr) return {*best, best_sc, false};

  SparsityPoint zero{0.0, 0.0, baseline};
  for (const SparsityPoint& pt : grid) {
    if (pt.s_embd == 0.0 && pt.s_tf == 0.0) {
      zero = pt;
      break;
    }
  }
  return {zero, 0.0, true};
}

inline CspResult find_csp_2d(const std::vector<SparsityPoint>& grid, double baseline,
                             const PartitionedCounts& p) {
  return find_csp_2d(grid, baseline, p.p_embd(), p.p_tf());
}

}  // namespace hmasim
