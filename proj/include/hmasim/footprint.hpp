#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "hmasim/fixed_point.hpp"
#include "hmasim/model.hpp"
#include "hmasim/pruning.hpp"

namespace hmasim {

/// Where each parameter class lives on chip.
///
/// adapter_albert: the whole pruned backbone sits in RRAM (bitmask in SLC,
/// non-zero values in MLC); only the task-specific set uses SRAM.
/// vanilla_albert: only the pruned embeddings sit in RRAM; the pruned
/// transformer values and the task-specific set use SRAM.
enum class Placement { adapter_albert, vanilla_albert };

inline std::string to_string(Placement p) {
  return p == Placement::adapter_albert ? "adapter-albert" : "vanilla-albert";
}

inline Placement parse_placement(const std::string& s) {
  if (s == "adapter-albert") return Placement::adapter_albert;
  if (s == "vanilla-albert") return Placement::vanilla_albert;
  throw std::invalid_argument("unknown placement '" + s +
                              "' (expected adapter-albert or vanilla-albert)");
}

/// paper_parity counts parameters only; full adds a double activation buffer
/// sized for the longest supported sequence.
enum class FootprintAccounting { paper_parity, full };

inline std::string to_string(FootprintAccounting a) {
  return a == FootprintAccounting::paper_parity ? "paper-parity" : "full";
}

inline FootprintAccounting parse_accounting(const std::string& s) {
  if (s == "paper-parity") return FootprintAccounting::paper_parity;
  if (s == "full") return FootprintAccounting::full;
  throw std::invalid_argument("unknown accounting '" + s + "' (expected paper-parity or full)");
}

/// Capacity demanded from each on-chip technology, in bytes. MLC capacity is
/// cell-equivalent: value bits divided by the cell's bit density.
struct FootprintRequirement {
  double mlc_bytes = 0.0;
  double slc_bytes = 0.0;
  double sram_bytes = 0.0;

  friend bool operator==(const FootprintRequirement&, const FootprintRequirement&) = default;
};

/// Map the compressed model onto capacity requirements. Task-specific sizing
/// uses the worst-case task. The bitmask costs one bit per backbone parameter
/// regardless of the value format; value storage scales with the format
/// width. Pruned values held in SRAM are stored compacted, with no mask
/// charge, so SRAM stays proportional to the value width.
inline FootprintRequirement footprint(const ModelSpec& model, std::span<const TaskSpec> tasks,
                                      double s_embd, double s_tf, FixedPointFormat fmt,
                                      Placement placement,
                                      FootprintAccounting accounting = FootprintAccounting::paper_parity,
                                      int mlc_bits_per_cell = 2) {
  fmt.validate();
  if (mlc_bits_per_cell < 1) throw std::invalid_argument("footprint: bits per cell must be >= 1");

  PartitionedCounts counts;  // all-zero when there are no tasks
  if (!tasks.empty()) {
    counts = count_partition(model, worst_case_task(model, tasks));
  } else {
    counts = count_partition(model, TaskSpec{"", 0, 0, 0});
  }

  const double value_bits = fmt.width();
  const double value_bytes = fmt.value_bytes();
  const auto nnz_embd = static_cast<double>(nonzero_after_pruning(s_embd, counts.backbone_embedding));
  const auto nnz_tf = static_cast<double>(nonzero_after_pruning(s_tf, counts.backbone_transformer));

  FootprintRequirement req;
  if (placement == Placement::adapter_albert) {
    req.slc_bytes = static_cast<double>(counts.backbone()) / 8.0;
    req.mlc_bytes = (nnz_embd + nnz_tf) * value_bits / (mlc_bits_per_cell * 8.0);
    req.sram_bytes = static_cast<double>(counts.task_specific()) * value_bytes;
  } else {
    req.slc_bytes = static_cast<double>(counts.backbone_embedding) / 8.0;
    req.mlc_bytes = nnz_embd * value_bits / (mlc_bits_per_cell * 8.0);
    req.sram_bytes = (nnz_tf + static_cast<double>(counts.task_specific())) * value_bytes;
  }

  if (accounting == FootprintAccounting::full) {
    const double widest = static_cast<double>(std::max(model.hidden_dim, model.ffn_dim));
    req.sram_bytes += static_cast<double>(model.max_seq_len) * widest * value_bytes * 2.0;
  }
  return req;
}

}  // namespace hmasim
