#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmasim/fixed_point.hpp"
#include "hmasim/footprint.hpp"
#include "hmasim/memory_tech.hpp"
#include "hmasim/model.hpp"
#include "hmasim/provision.hpp"

namespace hmasim {

struct DatapathSpec {
  std::uint64_t mac_units = 256;
  double clock_ghz = 1.0;

  void validate() const {
    if (mac_units == 0 || clock_ghz <= 0.0) {
      throw std::invalid_argument("DatapathSpec: mac_units and clock must be positive");
    }
  }

  friend bool operator==(const DatapathSpec&, const DatapathSpec&) = default;
};

struct ScheduleVisit {
  std::string task_id;
  std::uint64_t inferences = 1;
};

/// A multi-task inference workload: which tasks exist, in what order the
/// device visits them, and how the model is compressed and placed on chip.
struct ScenarioConfig {
  std::string name = "scenario";
  ModelSpec model;
  std::vector<TaskSpec> tasks;
  std::vector<ScheduleVisit> schedule;
  std::uint64_t seq_len = 128;
  FixedPointFormat fmt = FixedPointFormat::fp32();
  double s_embd = 0.0;
  double s_tf = 0.0;
  Placement placement = Placement::adapter_albert;
  DatapathSpec datapath;
  std::set<std::uint64_t> allowed_adapter_sizes{32, 64, 128};

  const TaskSpec& task_by_id(const std::string& id) const {
    for (const TaskSpec& t : tasks) {
      if (t.task_id == id) return t;
    }
    throw std::invalid_argument("scenario: unknown task '" + id + "'");
  }

  void validate() const {
    model.validate();
    datapath.validate();
    fmt.validate();
    if (tasks.empty()) throw std::invalid_argument("scenario: needs at least one task");
    if (schedule.empty()) throw std::invalid_argument("scenario: schedule must be non-empty");
    if (seq_len == 0 || seq_len > model.max_seq_len) {
      throw std::invalid_argument("scenario: seq_len must be in [1, max_seq_len]");
    }
    for (double s : {s_embd, s_tf}) {
      if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("scenario: sparsity out of [0,1]");
    }
    AdapterConfig adapters;
    adapters.allowed_sizes = allowed_adapter_sizes;
    for (const TaskSpec& t : tasks) {
      adapters.per_task[t.task_id] = {t.adapter1_size, t.adapter2_size};
      if (t.num_labels == 0) throw std::invalid_argument("scenario: tasks need >= 1 label");
    }
    adapters.validate();
    for (const ScheduleVisit& v : schedule) {
      task_by_id(v.task_id);
      if (v.inferences == 0) throw std::invalid_argument("scenario: visits need >= 1 inference");
    }
  }
};

/// Multiply-accumulate count for one inference: attention projections,
/// attention score/context products, feed-forward, the one-time embedding
/// projection, and both adapter bottlenecks per layer pass.
inline std::uint64_t compute_work(const ModelSpec& m, std::uint64_t seq_len,
                                  const TaskSpec& task) {
  const std::uint64_t l = seq_len;
  const std::uint64_t h = m.hidden_dim;
  const std::uint64_t per_layer = 4 * l * h * h            // Q/K/V/O projections
                                  + 2 * l * l * h          // scores + context
                                  + 2 * l * h * m.ffn_dim  // feed-forward pair
                                  + 2 * l * h * (task.adapter1_size + task.adapter2_size);
  return m.num_layers * per_layer + l * m.embed_dim * h;
}

/// Everything provisioned for one scenario: capacity requirements under full
/// accounting and one macro plan per technology.
struct ProvisionedSystem {
  FootprintRequirement requirement;
  MacroPlan sram, slc, mlc, dram;

  double area_mm2(const TechnologySet& techs) const {
    return (plan_area_um2(sram, techs.sram) + plan_area_um2(slc, techs.slc_rram) +
            plan_area_um2(mlc, techs.mlc_rram)) *
           1e-6;
  }
};

namespace detail {

inline std::uint64_t ceil_bytes(double b) {
  return static_cast<std::uint64_t>(std::ceil(b));
}

/// Parameter bytes pulled from DRAM when switching onto a task: the resident
/// per-task set under the active placement. For the vanilla placement that
/// includes the compacted pruned transformer values.
inline double reload_bytes(const ScenarioConfig& sc, const TaskSpec& to) {
  const PartitionedCounts counts = count_partition(sc.model, to);
  double params = static_cast<double>(counts.task_specific());
  if (sc.placement == Placement::vanilla_albert) {
    params += static_cast<double>(nonzero_after_pruning(sc.s_tf, counts.backbone_transformer));
  }
  return params * sc.fmt.value_bytes();
}

}  // namespace detail

inline ProvisionedSystem provision_system(const ScenarioConfig& sc, const TechnologySet& techs) {
  ProvisionedSystem sys;
  sys.requirement = footprint(sc.model, sc.tasks, sc.s_embd, sc.s_tf, sc.fmt, sc.placement,
                              FootprintAccounting::full, techs.mlc_rram.bits_per_cell);
  sys.sram = provision(detail::ceil_bytes(sys.requirement.sram_bytes), techs.sram);
  sys.slc = provision(detail::ceil_bytes(sys.requirement.slc_bytes), techs.slc_rram);
  sys.mlc = provision(detail::ceil_bytes(sys.requirement.mlc_bytes), techs.mlc_rram);
  double worst_reload = 0.0;
  for (const TaskSpec& t : sc.tasks) {
    worst_reload = std::max(worst_reload, detail::reload_bytes(sc, t));
  }
  sys.dram = provision(detail::ceil_bytes(worst_reload), techs.dram);
  return sys;
}

/// Cost ledger for a single inference of one task, before task switching and
/// leakage are applied.
struct InferenceBill {
  double compute_time_ns = 0.0;
  double weight_time_ns = 0.0;
  double activation_time_ns = 0.0;
  double weight_read_pj = 0.0;
  double activation_pj = 0.0;

  double time_ns() const {
    return std::max({compute_time_ns, weight_time_ns, activation_time_ns});
  }
  double energy_pj() const { return weight_read_pj + activation_pj; }
};

/// Per-inference weight and activation traffic. Weights stream from the
/// scratchpad on every one of the num_layers shared-layer passes; the
/// embedding tables and classifier are read once per inference. The three
/// technologies transfer in parallel within a pass, so pass time is the
/// slowest of them. Compute energy is excluded; compute time is not.
inline InferenceBill inference_bill(const ScenarioConfig& sc, const TechnologySet& techs,
                                    const ProvisionedSystem& sys, const TaskSpec& task) {
  const PartitionedCounts counts = count_partition(sc.model, task);
  const double vb = sc.fmt.value_bytes();
  const double nnz_tf =
      static_cast<double>(nonzero_after_pruning(sc.s_tf, counts.backbone_transformer));
  const double nnz_embd =
      static_cast<double>(nonzero_after_pruning(sc.s_embd, counts.backbone_embedding));
  const double passes = static_cast<double>(sc.model.num_layers);

  // One layer's worth of task-resident parameters, independent of sharing.
  const auto slot = [&](std::uint64_t s) {
    return s == 0 ? 0.0 : static_cast<double>((sc.model.hidden_dim * s + s) +
                                              (s * sc.model.hidden_dim + sc.model.hidden_dim));
  };
  const double layer_task_params =
      slot(task.adapter1_size) + slot(task.adapter2_size) + 4.0 * sc.model.hidden_dim;

  const bool adapter_placed = sc.placement == Placement::adapter_albert;
  const double pass_mlc_bytes = adapter_placed ? nnz_tf * vb : 0.0;
  const double pass_slc_bytes =
      adapter_placed ? static_cast<double>(counts.backbone_transformer) / 8.0 : 0.0;
  const double pass_sram_bytes =
      (adapter_placed ? layer_task_params : nnz_tf + layer_task_params) * vb;

  const double once_mlc_bytes = nnz_embd * vb;
  const double once_slc_bytes = static_cast<double>(counts.backbone_embedding) / 8.0;
  const double once_sram_bytes = static_cast<double>(counts.classifier_params) * vb;

  const auto read = [&](const MacroPlan& plan, const MemoryTechProfile& tech, double bytes) {
    return access_cost(plan, tech, bytes, AccessOp::read);
  };

  InferenceBill bill;
  const AccessCost pass_mlc = read(sys.mlc, techs.mlc_rram, pass_mlc_bytes);
  const AccessCost pass_slc = read(sys.slc, techs.slc_rram, pass_slc_bytes);
  const AccessCost pass_sram = read(sys.sram, techs.sram, pass_sram_bytes);
  const AccessCost once_mlc = read(sys.mlc, techs.mlc_rram, once_mlc_bytes);
  const AccessCost once_slc = read(sys.slc, techs.slc_rram, once_slc_bytes);
  const AccessCost once_sram = read(sys.sram, techs.sram, once_sram_bytes);

  bill.weight_time_ns = passes * std::max({pass_mlc.time_ns, pass_slc.time_ns, pass_sram.time_ns}) +
                        std::max({once_mlc.time_ns, once_slc.time_ns, once_sram.time_ns});
  bill.weight_read_pj = passes * (pass_mlc.energy_pj + pass_slc.energy_pj + pass_sram.energy_pj) +
                        once_mlc.energy_pj + once_slc.energy_pj + once_sram.energy_pj;

  // Activations: per pass the block reads and writes its seq x hidden
  // boundary plus the feed-forward intermediate, half reads half writes.
  const double l = static_cast<double>(sc.seq_len);
  const double act_bytes =
      passes * 2.0 * l *
          static_cast<double>(sc.model.hidden_dim + sc.model.ffn_dim) * vb +
      2.0 * l * static_cast<double>(sc.model.hidden_dim) * vb;
  const AccessCost act_read = read(sys.sram, techs.sram, act_bytes / 2.0);
  const AccessCost act_write = access_cost(sys.sram, techs.sram, act_bytes / 2.0, AccessOp::write);
  bill.activation_time_ns = act_read.time_ns + act_write.time_ns;
  bill.activation_pj = act_read.energy_pj + act_write.energy_pj;

  const double macs = static_cast<double>(compute_work(sc.model, sc.seq_len, task));
  bill.compute_time_ns =
      macs / (static_cast<double>(sc.datapath.mac_units) * sc.datapath.clock_ghz);
  return bill;
}

struct CostPair {
  double energy_pj = 0.0;
  double time_ns = 0.0;
};

/// Single inference cost including the SRAM leakage accrued over its own
/// latency window.
inline CostPair inference_cost(const ScenarioConfig& sc, const TechnologySet& techs,
                               const ProvisionedSystem& sys, const TaskSpec& task) {
  const InferenceBill bill = inference_bill(sc, techs, sys, task);
  const double leak_pj = techs.sram.leakage_pw_per_byte *
                         static_cast<double>(sys.sram.total_capacity()) * bill.time_ns() * 1e-9;
  return {bill.energy_pj() + leak_pj, bill.time_ns()};
}

/// DRAM-to-SRAM reload of the destination task's resident parameters; zero
/// when the task does not change. Backbone contents in RRAM persist across
/// switches under both placements.
inline CostPair switch_cost(const ScenarioConfig& sc, const TechnologySet& techs,
                            const ProvisionedSystem& sys, const TaskSpec& from,
                            const TaskSpec& to) {
  if (from.task_id == to.task_id) return {0.0, 0.0};
  const double bytes = detail::reload_bytes(sc, to);
  const AccessCost dram = access_cost(sys.dram, techs.dram, bytes, AccessOp::read);
  const AccessCost sram = access_cost(sys.sram, techs.sram, bytes, AccessOp::write);
  return {dram.energy_pj + sram.energy_pj, dram.time_ns + sram.time_ns};
}

struct NormalizedRatios {
  std::string baseline_name;
  double area_ratio = 1.0;
  double energy_ratio = 1.0;
  double latency_ratio = 1.0;
};

/// Amortized per-inference estimate with itemized energy and latency
/// ledgers; the headline totals are defined as the sum of their breakdown
/// entries.
struct CostReport {
  std::string scenario_name;
  Placement placement = Placement::adapter_albert;
  FixedPointFormat fmt;
  double area_mm2 = 0.0;
  double energy_per_inference_pj = 0.0;
  double latency_per_inference_ns = 0.0;

  // per-inference energy ledger
  double weight_read_pj = 0.0;
  double activation_pj = 0.0;
  double dram_switch_pj = 0.0;
  double leakage_pj = 0.0;

  // per-inference latency ledger
  double inference_ns = 0.0;
  double task_switch_ns = 0.0;

  std::uint64_t switch_count = 0;
  std::uint64_t total_inferences = 0;

  std::map<std::string, double> capacity_bytes;  // per on-chip technology
  std::map<std::string, double> area_breakdown_mm2;
  std::vector<NormalizedRatios> normalized;
};

/// Evaluate one schedule period. The schedule is treated as periodic: each
/// visit pays the switch from the previous visit's task, the first wrapping
/// around from the last, so a single-task schedule never switches and the
/// per-inference cost equals the plain inference cost exactly.
inline CostReport run_scenario(const ScenarioConfig& sc, const TechnologySet& techs) {
  sc.validate();
  techs.validate();
  const ProvisionedSystem sys = provision_system(sc, techs);

  std::map<std::string, InferenceBill> bills;
  for (const TaskSpec& t : sc.tasks) bills.emplace(t.task_id, inference_bill(sc, techs, sys, t));

  double weight_pj = 0.0, act_pj = 0.0, switch_pj = 0.0;
  double inference_ns = 0.0, switch_ns = 0.0;
  std::uint64_t switches = 0, inferences = 0;

  const std::size_t n = sc.schedule.size();
  for (std::size_t i = 0; i < n; ++i) {
    const ScheduleVisit& visit = sc.schedule[i];
    const TaskSpec& task = sc.task_by_id(visit.task_id);
    const TaskSpec& prev = sc.task_by_id(sc.schedule[(i + n - 1) % n].task_id);

    const CostPair sw = switch_cost(sc, techs, sys, prev, task);
    if (prev.task_id != task.task_id) ++switches;
    switch_pj += sw.energy_pj;
    switch_ns += sw.time_ns;

    const InferenceBill& bill = bills.at(visit.task_id);
    const double reps = static_cast<double>(visit.inferences);
    weight_pj += reps * bill.weight_read_pj;
    act_pj += reps * bill.activation_pj;
    inference_ns += reps * bill.time_ns();
    inferences += visit.inferences;
  }

  const double active_ns = inference_ns + switch_ns;
  const double leak_pj = techs.sram.leakage_pw_per_byte *
                         static_cast<double>(sys.sram.total_capacity()) * active_ns * 1e-9;

  CostReport report;
  report.scenario_name = sc.name;
  report.placement = sc.placement;
  report.fmt = sc.fmt;
  report.area_mm2 = sys.area_mm2(techs);
  report.switch_count = switches;
  report.total_inferences = inferences;

  const double inv = 1.0 / static_cast<double>(inferences);
  report.weight_read_pj = weight_pj * inv;
  report.activation_pj = act_pj * inv;
  report.dram_switch_pj = switch_pj * inv;
  report.leakage_pj = leak_pj * inv;
  report.energy_per_inference_pj =
      report.weight_read_pj + report.activation_pj + report.dram_switch_pj + report.leakage_pj;

  report.inference_ns = inference_ns * inv;
  report.task_switch_ns = switch_ns * inv;
  report.latency_per_inference_ns = report.inference_ns + report.task_switch_ns;

  report.capacity_bytes = {
      {"sram", static_cast<double>(sys.sram.total_capacity())},
      {"slc_rram", static_cast<double>(sys.slc.total_capacity())},
      {"mlc_rram", static_cast<double>(sys.mlc.total_capacity())},
  };
  report.area_breakdown_mm2 = {
      {"sram", plan_area_um2(sys.sram, techs.sram) * 1e-6},
      {"slc_rram", plan_area_um2(sys.slc, techs.slc_rram) * 1e-6},
      {"mlc_rram", plan_area_um2(sys.mlc, techs.mlc_rram) * 1e-6},
  };
  return report;
}

/// Baseline-over-report ratios; > 1 means the report improves on the
/// baseline.
inline NormalizedRatios compare(const CostReport& report, const CostReport& baseline) {
  const double metrics[] = {baseline.area_mm2,    baseline.energy_per_inference_pj,
                            baseline.latency_per_inference_ns, report.area_mm2,
                            report.energy_per_inference_pj,    report.latency_per_inference_ns};
  for (double m : metrics) {
    if (m <= 0.0) throw std::invalid_argument("compare: metrics must be positive");
  }
  NormalizedRatios r;
  r.baseline_name = baseline.scenario_name;
  r.area_ratio = baseline.area_mm2 / report.area_mm2;
  r.energy_ratio = baseline.energy_per_inference_pj / report.energy_per_inference_pj;
  r.latency_ratio = baseline.latency_per_inference_ns / report.latency_per_inference_ns;
  return r;
}

}  // namespace hmasim
