#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hmasim/footprint.hpp"
#include "hmasim/memory_tech.hpp"
#include "hmasim/perf.hpp"
#include "hmasim/pruning.hpp"
#include "hmasim/tensor.hpp"

namespace hmasim {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Input file problem with the offending field spelled out.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

namespace io_detail {

inline const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) {
    throw SchemaError(path + "." + key + ": missing required field");
  }
  return j.at(key);
}

inline std::uint64_t as_count(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  const bool ok = v.is_number_unsigned() ||
                  (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  if (!ok) throw SchemaError(path + "." + key + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline double as_number(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number()) throw SchemaError(path + "." + key + ": expected a number");
  return v.get<double>();
}

inline std::string as_string(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_string()) throw SchemaError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline bool as_bool(const json& j, const std::string& key, const std::string& path,
                    bool fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw SchemaError(path + "." + key + ": expected a boolean");
  return v.get<bool>();
}

inline json parse_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw SchemaError(path.string() + ": cannot open file");
  json j = json::parse(f, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw SchemaError(path.string() + ": not valid JSON");
  return j;
}

inline void check_schema_version(const json& j, const std::string& path) {
  const auto version = as_count(j, "schema_version", path);
  if (version != static_cast<std::uint64_t>(kSchemaVersion)) {
    throw SchemaError(path + ".schema_version: unsupported version " + std::to_string(version));
  }
}

}  // namespace io_detail

// --- model / scenario --------------------------------------------------------

inline ModelSpec model_from_json(const json& j, const std::string& path = "model") {
  using namespace io_detail;
  ModelSpec m;
  m.vocab_size = as_count(j, "vocab_size", path);
  m.embed_dim = as_count(j, "embed_dim", path);
  m.hidden_dim = as_count(j, "hidden_dim", path);
  m.ffn_dim = as_count(j, "ffn_dim", path);
  m.num_layers = as_count(j, "num_layers", path);
  m.num_heads = as_count(j, "num_heads", path);
  m.max_seq_len = as_count(j, "max_seq_len", path);
  m.max_position_embeddings = as_count(j, "max_position_embeddings", path);
  m.token_type_count = as_count(j, "token_type_count", path);
  m.share_adapters_across_layers = as_bool(j, "share_adapters_across_layers", path, true);
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return m;
}

inline json model_to_json(const ModelSpec& m) {
  return json{{"vocab_size", m.vocab_size},
              {"embed_dim", m.embed_dim},
              {"hidden_dim", m.hidden_dim},
              {"ffn_dim", m.ffn_dim},
              {"num_layers", m.num_layers},
              {"num_heads", m.num_heads},
              {"max_seq_len", m.max_seq_len},
              {"max_position_embeddings", m.max_position_embeddings},
              {"token_type_count", m.token_type_count},
              {"share_adapters_across_layers", m.share_adapters_across_layers}};
}

inline ScenarioConfig scenario_from_json(const json& j) {
  using namespace io_detail;
  const std::string path = "scenario";
  check_schema_version(j, path);
  ScenarioConfig sc;
  sc.name = as_string(j, "name", path);
  sc.model = model_from_json(require(j, "model", path), path + ".model");

  const json& tasks = require(j, "tasks", path);
  if (!tasks.is_array() || tasks.empty()) {
    throw SchemaError(path + ".tasks: expected a non-empty array");
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string tpath = path + ".tasks[" + std::to_string(i) + "]";
    TaskSpec t;
    t.task_id = as_string(tasks[i], "task_id", tpath);
    t.num_labels = as_count(tasks[i], "num_labels", tpath);
    t.adapter1_size = as_count(tasks[i], "adapter1_size", tpath);
    t.adapter2_size = as_count(tasks[i], "adapter2_size", tpath);
    sc.tasks.push_back(std::move(t));
  }

  const json& schedule = require(j, "schedule", path);
  if (!schedule.is_array() || schedule.empty()) {
    throw SchemaError(path + ".schedule: expected a non-empty array");
  }
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const std::string spath = path + ".schedule[" + std::to_string(i) + "]";
    ScheduleVisit v;
    v.task_id = as_string(schedule[i], "task_id", spath);
    v.inferences = as_count(schedule[i], "inferences", spath);
    sc.schedule.push_back(std::move(v));
  }

  sc.seq_len = as_count(j, "seq_len", path);
  try {
    sc.fmt = parse_format(as_string(j, "fmt", path));
    const json& sparsity = require(j, "sparsity", path);
    sc.s_embd = as_number(sparsity, "s_embd", path + ".sparsity");
    sc.s_tf = as_number(sparsity, "s_tf", path + ".sparsity");
    sc.placement = parse_placement(as_string(j, "placement", path));
    if (j.contains("datapath")) {
      sc.datapath.mac_units = as_count(j.at("datapath"), "mac_units", path + ".datapath");
      sc.datapath.clock_ghz = as_number(j.at("datapath"), "clock_ghz", path + ".datapath");
    }
    if (j.contains("allowed_adapter_sizes")) {
      const json& sizes = j.at("allowed_adapter_sizes");
      if (!sizes.is_array()) {
        throw SchemaError(path + ".allowed_adapter_sizes: expected an array");
      }
      sc.allowed_adapter_sizes.clear();
      for (const json& s : sizes) {
        if (!s.is_number_unsigned()) {
          throw SchemaError(path + ".allowed_adapter_sizes: expected non-negative integers");
        }
        sc.allowed_adapter_sizes.insert(s.get<std::uint64_t>());
      }
    }
    sc.validate();
  } catch (const SchemaError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return sc;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& file) {
  try {
    return scenario_from_json(io_detail::parse_file(file));
  } catch (const SchemaError& e) {
    throw SchemaError(file.string() + ": " + e.what());
  }
}

inline json scenario_to_json(const ScenarioConfig& sc) {
  json tasks = json::array();
  for (const TaskSpec& t : sc.tasks) {
    tasks.push_back(json{{"task_id", t.task_id},
                         {"num_labels", t.num_labels},
                         {"adapter1_size", t.adapter1_size},
                         {"adapter2_size", t.adapter2_size}});
  }
  json schedule = json::array();
  for (const ScheduleVisit& v : sc.schedule) {
    schedule.push_back(json{{"task_id", v.task_id}, {"inferences", v.inferences}});
  }
  return json{{"schema_version", kSchemaVersion},
              {"name", sc.name},
              {"model", model_to_json(sc.model)},
              {"tasks", tasks},
              {"schedule", schedule},
              {"seq_len", sc.seq_len},
              {"fmt", to_string(sc.fmt)},
              {"sparsity", json{{"s_embd", sc.s_embd}, {"s_tf", sc.s_tf}}},
              {"placement", to_string(sc.placement)},
              {"datapath",
               json{{"mac_units", sc.datapath.mac_units}, {"clock_ghz", sc.datapath.clock_ghz}}},
              {"allowed_adapter_sizes", sc.allowed_adapter_sizes}};
}

// --- technology profiles -----------------------------------------------------

inline MemoryTechProfile tech_from_json(const json& j, MemoryTechKind kind,
                                        const std::string& path) {
  using namespace io_detail;
  MemoryTechProfile t;
  t.kind = kind;
  t.bits_per_cell = static_cast<int>(as_count(j, "bits_per_cell", path));
  t.read_energy_pj_per_bit = as_number(j, "read_energy_pj_per_bit", path);
  t.write_energy_pj_per_bit = as_number(j, "write_energy_pj_per_bit", path);
  t.read_latency_ns = as_number(j, "read_latency_ns", path);
  t.write_latency_ns = as_number(j, "write_latency_ns", path);
  t.leakage_pw_per_byte = as_number(j, "leakage_pw_per_byte", path);
  t.area_um2_per_byte = as_number(j, "area_um2_per_byte", path);
  const json& catalog = require(j, "macro_catalog", path);
  if (!catalog.is_array() || catalog.empty()) {
    throw SchemaError(path + ".macro_catalog: expected a non-empty array");
  }
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const std::string mpath = path + ".macro_catalog[" + std::to_string(i) + "]";
    MacroSpec m;
    m.capacity_bytes = as_count(catalog[i], "capacity_bytes", mpath);
    m.bandwidth_gb_per_s = as_number(catalog[i], "bandwidth_gb_per_s", mpath);
    t.macro_catalog.push_back(m);
  }
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return t;
}

inline TechnologySet technology_set_from_json(const json& j) {
  using namespace io_detail;
  const std::string path = "profile";
  check_schema_version(j, path);
  const json& techs = require(j, "technologies", path);
  TechnologySet set;
  set.sram = tech_from_json(require(techs, "sram", path + ".technologies"), MemoryTechKind::sram,
                            path + ".technologies.sram");
  set.slc_rram = tech_from_json(require(techs, "slc_rram", path + ".technologies"),
                                MemoryTechKind::slc_rram, path + ".technologies.slc_rram");
  set.mlc_rram = tech_from_json(require(techs, "mlc_rram", path + ".technologies"),
                                MemoryTechKind::mlc_rram, path + ".technologies.mlc_rram");
  set.dram = tech_from_json(require(techs, "dram", path + ".technologies"), MemoryTechKind::dram,
                            path + ".technologies.dram");
  return set;
}

inline TechnologySet load_technology_set(const std::filesystem::path& file) {
  try {
    return technology_set_from_json(io_detail::parse_file(file));
  } catch (const SchemaError& e) {
    throw SchemaError(file.string() + ": " + e.what());
  }
}

// --- tensors -----------------------------------------------------------------

inline Tensor2D tensor_from_json(const json& j, const std::string& path = "tensor") {
  using namespace io_detail;
  const std::uint64_t rows = as_count(j, "rows", path);
  const std::uint64_t cols = as_count(j, "cols", path);
  const json& data = require(j, "data", path);
  if (!data.is_array() || data.size() != rows * cols) {
    throw SchemaError(path + ".data: expected an array of rows*cols numbers");
  }
  std::vector<double> values;
  values.reserve(data.size());
  for (const json& v : data) {
    if (!v.is_number()) throw SchemaError(path + ".data: expected numbers");
    values.push_back(v.get<double>());
  }
  return Tensor2D(rows, cols, std::move(values));
}

inline Tensor2D load_tensor(const std::filesystem::path& file) {
  try {
    return tensor_from_json(io_detail::parse_file(file));
  } catch (const SchemaError& e) {
    throw SchemaError(file.string() + ": " + e.what());
  }
}

inline json tensor_to_json(const Tensor2D& t) {
  return json{{"rows", t.rows}, {"cols", t.cols}, {"data", t.data}};
}

// --- CSV grids ---------------------------------------------------------------

namespace io_detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    std::size_t start = 0;
    while (start < field.size() && field[start] == ' ') ++start;
    fields.push_back(field.substr(start));
  }
  return fields;
}

inline double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SchemaError(context + ": '" + s + "' is not a number");
  }
}

}  // namespace io_detail

/// CSV with header s_embd,s_tf,accuracy.
inline std::vector<SparsityPoint> load_sparsity_grid(const std::filesystem::path& file) {
  std::ifstream f(file);
  if (!f) throw SchemaError(file.string() + ": cannot open file");
  std::string line;
  if (!std::getline(f, line) || io_detail::split_csv_line(line) !=
                                    std::vector<std::string>{"s_embd", "s_tf", "accuracy"}) {
    throw SchemaError(file.string() + ": expected header 's_embd,s_tf,accuracy'");
  }
  std::vector<SparsityPoint> grid;
  std::size_t row = 1;
  while (std::getline(f, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = io_detail::split_csv_line(line);
    const std::string ctx = file.string() + ":row " + std::to_string(row);
    if (fields.size() != 3) throw SchemaError(ctx + ": expected 3 columns");
    grid.push_back({io_detail::parse_double(fields[0], ctx), io_detail::parse_double(fields[1], ctx),
                    io_detail::parse_double(fields[2], ctx)});
  }
  if (grid.empty()) throw SchemaError(file.string() + ": no data rows");
  return grid;
}

/// CSV with header adapter_size,accuracy.
inline std::map<std::uint64_t, double> load_accuracy_grid(const std::filesystem::path& file) {
  std::ifstream f(file);
  if (!f) throw SchemaError(file.string() + ": cannot open file");
  std::string line;
  if (!std::getline(f, line) || io_detail::split_csv_line(line) !=
                                    std::vector<std::string>{"adapter_size", "accuracy"}) {
    throw SchemaError(file.string() + ": expected header 'adapter_size,accuracy'");
  }
  std::map<std::uint64_t, double> grid;
  std::size_t row = 1;
  while (std::getline(f, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = io_detail::split_csv_line(line);
    const std::string ctx = file.string() + ":row " + std::to_string(row);
    if (fields.size() != 2) throw SchemaError(ctx + ": expected 2 columns");
    const double size = io_detail::parse_double(fields[0], ctx);
    if (size < 0 || size != std::floor(size)) {
      throw SchemaError(ctx + ": adapter_size must be a non-negative integer");
    }
    grid[static_cast<std::uint64_t>(size)] = io_detail::parse_double(fields[1], ctx);
  }
  if (grid.empty()) throw SchemaError(file.string() + ": no data rows");
  return grid;
}

// --- reports -----------------------------------------------------------------

inline json report_to_json(const CostReport& r, const std::string& manifest_ref) {
  json out{{"schema_version", kSchemaVersion},
           {"scenario_name", r.scenario_name},
           {"manifest", manifest_ref},
           {"placement", to_string(r.placement)},
           {"fmt", to_string(r.fmt)},
           {"area_mm2", r.area_mm2},
           {"energy_per_inference_pj", r.energy_per_inference_pj},
           {"latency_per_inference_ns", r.latency_per_inference_ns},
           {"energy_breakdown_pj",
            json{{"weight_read", r.weight_read_pj},
                 {"activation", r.activation_pj},
                 {"dram_switch", r.dram_switch_pj},
                 {"leakage", r.leakage_pj}}},
           {"latency_breakdown_ns",
            json{{"inference", r.inference_ns}, {"task_switch", r.task_switch_ns}}},
           {"switch_count", r.switch_count},
           {"total_inferences", r.total_inferences},
           {"capacity_bytes", r.capacity_bytes},
           {"area_breakdown_mm2", r.area_breakdown_mm2}};
  if (!r.normalized.empty()) {
    json norms = json::array();
    for (const NormalizedRatios& n : r.normalized) {
      norms.push_back(json{{"baseline", n.baseline_name},
                           {"area_ratio", n.area_ratio},
                           {"energy_ratio", n.energy_ratio},
                           {"latency_ratio", n.latency_ratio}});
    }
    out["normalized_vs_baseline"] = norms;
  }
  return out;
}

/// Flat plot-ready rows: metric,component,value,unit.
inline std::string report_to_csv(const CostReport& r) {
  std::ostringstream out;
  out << "metric,component,value,unit\n";
  const auto row = [&](const std::string& metric, const std::string& component, double value,
                       const std::string& unit) {
    out << metric << ',' << component << ',' << json(value).dump() << ',' << unit << '\n';
  };
  row("area", "total", r.area_mm2, "mm2");
  for (const auto& [tech, v] : r.area_breakdown_mm2) row("area", tech, v, "mm2");
  row("energy_per_inference", "total", r.energy_per_inference_pj, "pJ");
  row("energy_per_inference", "weight_read", r.weight_read_pj, "pJ");
  row("energy_per_inference", "activation", r.activation_pj, "pJ");
  row("energy_per_inference", "dram_switch", r.dram_switch_pj, "pJ");
  row("energy_per_inference", "leakage", r.leakage_pj, "pJ");
  row("latency_per_inference", "total", r.latency_per_inference_ns, "ns");
  row("latency_per_inference", "inference", r.inference_ns, "ns");
  row("latency_per_inference", "task_switch", r.task_switch_ns, "ns");
  row("schedule", "switch_count", static_cast<double>(r.switch_count), "count");
  row("schedule", "total_inferences", static_cast<double>(r.total_inferences), "count");
  for (const auto& [tech, v] : r.capacity_bytes) row("capacity", tech, v, "bytes");
  for (const NormalizedRatios& n : r.normalized) {
    row("normalized_vs_" + n.baseline_name, "area_ratio", n.area_ratio, "ratio");
    row("normalized_vs_" + n.baseline_name, "energy_ratio", n.energy_ratio, "ratio");
    row("normalized_vs_" + n.baseline_name, "latency_ratio", n.latency_ratio, "ratio");
  }
  return out.str();
}

inline json footprint_to_json(const FootprintRequirement& req) {
  return json{{"mlc_bytes", req.mlc_bytes},
              {"slc_bytes", req.slc_bytes},
              {"sram_bytes", req.sram_bytes}};
}

}  // namespace hmasim
