#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "hmasim/pruning.hpp"

using namespace hmasim;

TEST_CASE("magnitude pruning zeroes the smallest values") {
  const Tensor2D t(1, 4, {1.0, -4.0, 2.0, 3.0});
  const Tensor2D pruned = prune_magnitude(t, 0.5);
  CHECK(pruned.data == std::vector<double>{0.0, -4.0, 0.0, 3.0});
}

TEST_CASE("pruning at the extremes") {
  const Tensor2D t = random_tensor(5, 5, 17);
  CHECK(prune_magnitude(t, 0.0) == t);
  const Tensor2D all = prune_magnitude(t, 1.0);
  CHECK(std::all_of(all.data.begin(), all.data.end(), [](double v) { return v == 0.0; }));
  CHECK_THROWS_AS(prune_magnitude(t, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(prune_magnitude(t, -0.1), std::invalid_argument);
}

TEST_CASE("magnitude ties break toward the lower flat index") {
  const Tensor2D t(1, 4, {2.0, -2.0, 2.0, 2.0});
  const Tensor2D pruned = prune_magnitude(t, 0.5);
  CHECK(pruned.data == std::vector<double>{0.0, 0.0, 2.0, 2.0});
}

TEST_CASE("pruned element count is exactly floor(sparsity*n)") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 1 + rng() % 40;
    const double sparsity = static_cast<double>(rng() % 101) / 100.0;
    const Tensor2D t = random_tensor(1, n, rng(), 0.0, 0.5, 1.5);  // keep away from zero
    const Tensor2D pruned = prune_magnitude(t, sparsity);
    const auto zeros = static_cast<std::uint64_t>(
        std::count(pruned.data.begin(), pruned.data.end(), 0.0));
    CHECK(zeros == pruned_zero_count(sparsity, n));
    CHECK(nonzero_after_pruning(sparsity, n) == n - zeros);
  }
}

TEST_CASE("cumulative sparsity is the parameter-weighted mix") {
  CHECK(cumulative_sparsity(0.5, 0.5, 0.4, 0.6) == 0.5);
  CHECK(cumulative_sparsity(0.3, 0.7, 0.4, 0.6) == Catch::Approx(0.54));
  // embedding-only pruning reaches ~0.188 whole-model sparsity
  CHECK(cumulative_sparsity(0.4712, 0.0, 0.399, 0.601) == Catch::Approx(0.188).margin(1e-3));
  CHECK_THROWS_AS(cumulative_sparsity(1.2, 0.0, 0.4, 0.6), std::invalid_argument);
}

TEST_CASE("cumulative sparsity is linear and bounded by the larger input") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    double pe = frac(rng), pt = frac(rng);
    const double norm = std::max(1.0, pe + pt);  // keep pe + pt <= 1
    pe /= norm;
    pt /= norm;
    const double se = frac(rng), st = frac(rng);
    // linear in each argument: finite differences reproduce the weights
    CHECK(cumulative_sparsity(se, st, pe, pt) == se * pe + st * pt);
    CHECK(cumulative_sparsity(1.0, st, pe, pt) - cumulative_sparsity(0.0, st, pe, pt) ==
          Catch::Approx(pe).margin(1e-15));
    CHECK(cumulative_sparsity(se, 1.0, pe, pt) - cumulative_sparsity(se, 0.0, pe, pt) ==
          Catch::Approx(pt).margin(1e-15));
    CHECK(cumulative_sparsity(se, st, pe, pt) <= std::max(se, st) + 1e-15);
  }
}

TEST_CASE("cumulative sparsity accepts partition counts") {
  PartitionedCounts p;
  p.backbone_embedding = 399;
  p.backbone_transformer = 601;
  CHECK(cumulative_sparsity(1.0, 0.0, p) == Catch::Approx(0.399));
  CHECK(cumulative_sparsity(0.0, 1.0, p) == Catch::Approx(0.601));
}

TEST_CASE("1d critical sparsity scan") {
  const std::vector<std::pair<double, double>> curve{{0.1, 91.0}, {0.2, 90.5}, {0.3, 89.0}};
  CHECK(find_csp_1d(curve, 90.0) == 0.2);
  CHECK(find_csp_1d(curve, 80.0) == 0.3);   // everything qualifies
  CHECK(find_csp_1d(curve, 95.0) == 0.0);   // nothing qualifies
  CHECK_THROWS_AS(find_csp_1d({}, 90.0), std::invalid_argument);
}

namespace {

CspResult brute_force_csp(const std::vector<SparsityPoint>& grid, double baseline, double pe,
                          double pt) {
  const SparsityPoint* best = nullptr;
  double best_sc = 0.0;
  for (const auto& pt2 : grid) {
    if (pt2.accuracy < baseline) continue;
    const double sc = pt2.s_embd * pe + pt2.s_tf * pt;
    if (best == nullptr || sc > best_sc ||
        (sc == best_sc && (pt2.accuracy > best->accuracy ||
                           (pt2.accuracy == best->accuracy && pt2.s_embd < best->s_embd)))) {
      best = &pt2;
      best_sc = sc;
    }
  }
  if (best) return {*best, best_sc, false};
  return {{0.0, 0.0, baseline}, 0.0, true};
}

}  // namespace

TEST_CASE("2d grid search matches an exhaustive oracle on random grids") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  std::uniform_real_distribution<double> acc(70.0, 95.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SparsityPoint> grid;
    const std::size_t n = 1 + rng() % 20;
    for (std::size_t i = 0; i < n; ++i) grid.push_back({frac(rng), frac(rng), acc(rng)});
    const double baseline = acc(rng);
    const double pe = 0.399, pt = 0.601;
    const CspResult got = find_csp_2d(grid, baseline, pe, pt);
    const CspResult want = brute_force_csp(grid, baseline, pe, pt);
    CHECK(got.fallback == want.fallback);
    CHECK(got.point == want.point);
    CHECK(got.cumulative == want.cumulative);
  }
}

TEST_CASE("singleton grid at zero sparsity") {
  const std::vector<SparsityPoint> grid{{0.0, 0.0, 85.0}};
  const CspResult r = find_csp_2d(grid, 80.0, 0.4, 0.6);
  CHECK_FALSE(r.fallback);
  CHECK(r.point == grid[0]);
  CHECK(r.cumulative == 0.0);
}

TEST_CASE("fallback reports the zero point when nothing qualifies") {
  const std::vector<SparsityPoint> grid{{0.5, 0.5, 70.0}, {0.0, 0.0, 75.0}};
  const CspResult r = find_csp_2d(grid, 80.0, 0.4, 0.6);
  CHECK(r.fallback);
  CHECK(r.point.s_embd == 0.0);
  CHECK(r.point.s_tf == 0.0);
  CHECK(r.point.accuracy == 75.0);  // the grid's own zero row
  CHECK_THROWS_AS(find_csp_2d({}, 80.0, 0.4, 0.6), std::invalid_argument);
}

TEST_CASE("threshold and argmax selections are affine invariant") {
  // rescaling all accuracies and the baseline together must not change picks
  const std::vector<SparsityPoint> grid{
      {0.1, 0.0, 90.0}, {0.4, 0.2, 88.5}, {0.2, 0.5, 87.0}, {0.6, 0.6, 79.0}};
  const double baseline = 86.0;
  const CspResult base = find_csp_2d(grid, baseline, 0.399, 0.601);
  for (const auto& [a, b] : {std::pair{2.0, 5.0}, std::pair{0.1, -3.0}}) {
    std::vector<SparsityPoint> scaled = grid;
    for (auto& p : scaled) p.accuracy = a * p.accuracy + b;
    const CspResult got = find_csp_2d(scaled, a * baseline + b, 0.399, 0.601);
    CHECK(got.point.s_embd == base.point.s_embd);
    CHECK(got.point.s_tf == base.point.s_tf);
  }
}
