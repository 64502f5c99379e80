#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hmasim {

/// Dimensions of the shared-layer transformer with a factorized embedding.
/// Defaults describe ALBERT-base (hidden 768, twelve executions of one layer).
struct ModelSpec {
  std::uint64_t vocab_size = 30000;
  std::uint64_t embed_dim = 128;
  std::uint64_t hidden_dim = 768;
  std::uint64_t ffn_dim = 3072;
  std::uint64_t num_layers = 12;  // executions of the single shared layer
  std::uint64_t num_heads = 12;
  std::uint64_t max_seq_len = 512;
  std::uint64_t max_position_embeddings = 512;
  std::uint64_t token_type_count = 2;
  bool share_adapters_across_layers = true;

  void validate() const {
    const std::uint64_t counts[] = {vocab_size,  embed_dim, hidden_dim,
                                    ffn_dim,     num_layers, num_heads,
                                    max_seq_len, max_position_embeddings, token_type_count};
    for (auto c : counts) {
      if (c == 0) throw std::invalid_argument("ModelSpec: all counts must be strictly positive");
    }
    if (hidden_dim % num_heads != 0) {
      throw std::invalid_argument("ModelSpec: hidden_dim must be divisible by num_heads");
    }
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// One inference task: a classifier head plus its two adapter bottleneck
/// sizes. A size of 0 means the slot carries no adapter at all (the plain
/// shared-layer model).
struct TaskSpec {
  std::string task_id;
  std::uint64_t num_labels = 2;
  std::uint64_t adapter1_size = 64;
  std::uint64_t adapter2_size = 64;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

/// Per-task adapter size assignments constrained to an allowed size menu.
struct AdapterConfig {
  std::set<std::uint64_t> allowed_sizes{32, 64, 128};
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> per_task;

  void validate() const {
    for (const auto& [task, sizes] : per_task) {
      for (std::uint64_t s : {sizes.first, sizes.second}) {
        if (s != 0 && !allowed_sizes.contains(s)) {
          throw std::invalid_argument("AdapterConfig: task '" + task + "' uses size " +
                                      std::to_string(s) + " outside the allowed set");
        }
      }
    }
  }
};

/// Exact parameter counts split into the frozen backbone (embedding block and
/// shared transformer layer) and the per-task set, itemized so callers can
/// separate what is retrained from what is merely task-resident.
struct PartitionedCounts {
  std::uint64_t backbone_embedding = 0;
  std::uint64_t backbone_transformer = 0;
  std::uint64_t adapter_params = 0;
  std::uint64_t layer_norm_params = 0;
  std::uint64_t classifier_params = 0;

  std::uint64_t task_specific() const {
    return adapter_params + layer_norm_params + classifier_params;
  }
  /// Retrained parameters, independent of the classifier head's label count.
  std::uint64_t trainable() const { return adapter_params + layer_norm_params; }
  std::uint64_t backbone() const { return backbone_embedding + backbone_transformer; }
  std::uint64_t total() const { return backbone() + task_specific(); }

  double p_embd() const {
    return total() == 0 ? 0.0 : static_cast<double>(backbone_embedding) / static_cast<double>(total());
  }
  double p_tf() const {
    return total() == 0 ? 0.0 : static_cast<double>(backbone_transformer) / static_cast<double>(total());
  }

  friend bool operator==(const PartitionedCounts&, const PartitionedCounts&) = default;
};

/// Closed-form parameter accounting. All matrices count weights plus biases.
///
/// Backbone embedding: token/position/type tables, the embedding layer norm
/// (part of the fully shared embedding block), and the projection into the
/// hidden size. Backbone transformer: Q/K/V/O attention projections, both
/// feed-forward matrices, and the pooler head, counted once for the single
/// shared layer. Task-specific: the two adapter slots (shared across layer
/// executions unless configured per-layer), the re-trainable layer norms of
/// the shared layer, and the classifier.
inline PartitionedCounts count_partition(const ModelSpec& m, const TaskSpec& task) {
  const std::uint64_t h = m.hidden_dim;
  const std::uint64_t e = m.embed_dim;
  const std::uint64_t f = m.ffn_dim;

  PartitionedCounts c;
  c.backbone_embedding = m.vocab_size * e + m.max_position_embeddings * e +
                         m.token_type_count * e + 2 * e + (e * h + h);

  const auto adapter_slot = [h](std::uint64_t s) -> std::uint64_t {
    if (s == 0) return 0;  // slot absent
    return (h * s + s) + (s * h + h);
  };

  if (m.num_layers > 0) {
    c.backbone_transformer = 4 * (h * h + h)    // attention Q/K/V/O
                             + (h * f + f)      // feed-forward in
                             + (f * h + h)      // feed-forward out
                             + (h * h + h);     // pooler
    c.adapter_params = adapter_slot(task.adapter1_size) + adapter_slot(task.adapter2_size);
    if (!m.share_adapters_across_layers) c.adapter_params *= m.num_layers;
    c.layer_norm_params = 4 * h;  // scale+offset after attention and after the FFN
  }
  c.classifier_params = h * task.num_labels + task.num_labels;
  return c;
}

/// Relative parameter overhead of an adapter-augmented model over a base
/// total: (total - base) / base.
inline double param_overhead(const PartitionedCounts& counts, std::uint64_t base_total) {
  if (base_total == 0) throw std::invalid_argument("param_overhead: base_total must be positive");
  return (static_cast<double>(counts.total()) - static_cast<double>(base_total)) /
         static_cast<double>(base_total);
}

/// The task with the largest task-specific parameter set; ties resolve to the
/// smallest task_id. Drives worst-case on-chip provisioning.
inline const TaskSpec& worst_case_task(const ModelSpec& m, std::span<const TaskSpec> tasks) {
  if (tasks.empty()) throw std::invalid_argument("worst_case_task: task list is empty");
  const TaskSpec* best = &tasks[0];
  std::uint64_t best_count = count_partition(m, tasks[0]).task_specific();
  for (const TaskSpec& t : tasks.subspan(1)) {
    const std::uint64_t n = count_partition(m, t).task_specific();
    if (n > best_count || (n == best_count && t.task_id < best->task_id)) {
      best = &t;
      best_count = n;
    }
  }
  return *best;
}

enum class VaseMode {
  smallest_meeting,  // minimum size whose accuracy meets the baseline
  argmax             // best accuracy outright
};

/// Select an adapter size from a measured size -> accuracy table. In
/// smallest_meeting mode, the smallest size reaching the baseline wins; if
/// none qualifies the selection falls back to the accuracy argmax (ties to
/// the smaller size).
inline std::uint64_t vase_select(const std::map<std::uint64_t, double>& grid, double baseline,
                                 VaseMode mode) {
  if (grid.empty()) throw std::invalid_argument("vase_select: empty accuracy grid");
  if (mode == VaseMode::smallest_meeting) {
    for (const auto& [size, accuracy] : grid) {  // std::map iterates sizes ascending
      if (accuracy >= baseline) return size;
    }
  }
  std::uint64_t best = grid.begin()->first;
  double best_acc = grid.begin()->second;
  for (const auto& [size, accuracy] : grid) {
    if (accuracy > best_acc) {
      best = size;
      best_acc = accuracy;
    }
  }
  return best;
}

}  // namespace hmasim
