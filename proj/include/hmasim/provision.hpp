#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hmasim/memory_tech.hpp"

namespace hmasim {

struct MacroSelection {
  MacroSpec macro;
  std::uint32_t count = 0;
};

/// A provisioned multiset of macros from one technology's catalog.
struct MacroPlan {
  MemoryTechKind kind = MemoryTechKind::sram;
  std::uint64_t requirement_bytes = 0;
  std::vector<MacroSelection> macros;

  bool empty() const { return macros.empty(); }

  std::uint64_t total_capacity() const {
    std::uint64_t total = 0;
    for (const auto& sel : macros) total += sel.macro.capacity_bytes * sel.count;
    return total;
  }

  std::uint32_t macro_count() const {
    std::uint32_t n = 0;
    for (const auto& sel : macros) n += sel.count;
    return n;
  }
};

/// Capacity-weighted mean of the member macros' bandwidths, bytes/ns.
inline double aggregate_bandwidth(const MacroPlan& plan) {
  if (plan.empty()) throw std::invalid_argument("aggregate_bandwidth: empty plan");
  double weighted = 0.0;
  double capacity = 0.0;
  for (const auto& sel : plan.macros) {
    const double cap = static_cast<double>(sel.macro.capacity_bytes) * sel.count;
    weighted += cap * sel.macro.bandwidth_gb_per_s;
    capacity += cap;
  }
  return weighted / capacity;
}

inline double plan_area_um2(const MacroPlan& plan, const MemoryTechProfile& tech) {
  return static_cast<double>(plan.total_capacity()) * tech.area_um2_per_byte;
}

namespace detail {

// Exact search: over multiples of the catalog gcd, track the cheapest way
// (fewest macros, then largest bandwidth-capacity product) to reach each
// achievable total, then take the smallest achievable total >= requirement.
// Any multiset total is a multiple of the gcd, so nothing is missed.
inline bool provision_exact(std::uint64_t requirement, const std::vector<MacroSpec>& catalog,
                            std::uint32_t max_macros, MacroPlan& plan) {
  std::uint64_t g = 0;
  std::uint64_t max_cap = 0;
  for (const auto& m : catalog) {
    g = std::gcd(g, m.capacity_bytes);
    max_cap = std::max(max_cap, m.capacity_bytes);
  }
  const std::uint64_t top = requirement + max_cap;
  const std::uint64_t states = top / g + 1;
  if (states > (std::uint64_t{1} << 20)) return false;  // pathological catalog; use the heuristic

  struct Cell {
    std::uint32_t count = std::numeric_limits<std::uint32_t>::max();
    double bw_capacity = -1.0;  // sum of capacity*bandwidth, maximized at equal count
    std::int32_t via = -1;      // catalog index used to reach this total
  };
  std::vector<Cell> dp(states);
  dp[0] = {0, 0.0, -1};

  for (std::uint64_t t = 1; t < states; ++t) {
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      const std::uint64_t cap = catalog[i].capacity_bytes;
      const std::uint64_t step = cap / g;
      if (t < step) continue;
      const Cell& prev = dp[t - step];
      if (prev.count == std::numeric_limits<std::uint32_t>::max()) continue;
      const std::uint32_t count = prev.count + 1;
      const double bw = prev.bw_capacity + static_cast<double>(cap) * catalog[i].bandwidth_gb_per_s;
      Cell& cur = dp[t];
      if (count < cur.count || (count == cur.count && bw > cur.bw_capacity)) {
        cur = {count, bw, static_cast<std::int32_t>(i)};
      }
    }
  }

  const std::uint64_t first = (requirement + g - 1) / g;
  for (std::uint64_t t = first; t < states; ++t) {
    if (dp[t].count == std::numeric_limits<std::uint32_t>::max()) continue;
    if (dp[t].count > max_macros) return false;
    std::vector<std::uint32_t> per_macro(catalog.size(), 0);
    for (std::uint64_t cur = t; cur != 0;) {
      const auto i = static_cast<std::size_t>(dp[cur].via);
      ++per_macro[i];
      cur -= catalog[i].capacity_bytes / g;
    }
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      if (per_macro[i] > 0) plan.macros.push_back({catalog[i], per_macro[i]});
    }
    return true;
  }
  return false;
}

// Heuristic for out-of-bound requirements: fill largest-first, then swap the
// final macro for the smallest one that still covers the residual.
inline void provision_greedy(std::uint64_t requirement, std::vector<MacroSpec> catalog,
                             MacroPlan& plan) {
  std::sort(catalog.begin(), catalog.end(), [](const MacroSpec& a, const MacroSpec& b) {
    return a.capacity_bytes > b.capacity_bytes;
  });
  std::vector<std::uint32_t> per_macro(catalog.size(), 0);
  std::uint64_t remaining = requirement;
  while (remaining > 0) {
    std::size_t pick = catalog.size() - 1;  // smallest covers any residual below it
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      if (catalog[i].capacity_bytes <= remaining) {
        pick = i;
        break;
      }
    }
    if (catalog[pick].capacity_bytes >= remaining && pick + 1 < catalog.size()) {
      // exchange pass: shrink the closing macro to the smallest that covers
      for (std::size_t i = catalog.size(); i-- > pick;) {
        if (catalog[i].capacity_bytes >= remaining) {
          pick = i;
          break;
        }
      }
    }
    ++per_macro[pick];
    remaining -= std::min(remaining, catalog[pick].capacity_bytes);
  }
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (per_macro[i] > 0) plan.macros.push_back({catalog[i], per_macro[i]});
  }
}

}  // namespace detail

/// Pick the macro multiset with the least capacity above the requirement;
/// ties prefer fewer macros, then higher aggregate bandwidth. The exact
/// search is used up to 32 macros, beyond which a largest-first heuristic
/// with an exchange pass takes over.
inline MacroPlan provision(std::uint64_t requirement_bytes, const MemoryTechProfile& tech,
                           std::uint32_t max_exact_macros = 32) {
  MacroPlan plan;
  plan.kind = tech.kind;
  plan.requirement_bytes = requirement_bytes;
  if (requirement_bytes == 0) return plan;
  if (tech.macro_catalog.empty()) {
    throw std::invalid_argument(to_string(tech.kind) + ": empty macro catalog");
  }
  if (!detail::provision_exact(requirement_bytes, tech.macro_catalog, max_exact_macros, plan)) {
    detail::provision_greedy(requirement_bytes, tech.macro_catalog, plan);
  }
  return plan;
}

struct AccessCost {
  double energy_pj = 0.0;
  double time_ns = 0.0;
};

enum class AccessOp { read, write };

/// Streaming cost of moving `bytes` through a provisioned plan: per-bit
/// energy and transfer time at the aggregate bandwidth, floored at one
/// access latency.
inline AccessCost access_cost(const MacroPlan& plan, const MemoryTechProfile& tech, double bytes,
                              AccessOp op) {
  const double energy_per_bit =
      op == AccessOp::read ? tech.read_energy_pj_per_bit : tech.write_energy_pj_per_bit;
  const double latency = op == AccessOp::read ? tech.read_latency_ns : tech.write_latency_ns;
  if (bytes <= 0.0) return {0.0, latency};
  const double bandwidth = aggregate_bandwidth(plan);  // throws on empty plan
  if (bandwidth <= 0.0) throw std::invalid_argument(to_string(tech.kind) + ": zero bandwidth");
  return {bytes * 8.0 * energy_per_bit, std::max(bytes / bandwidth, latency)};
}

}  // namespace hmasim
