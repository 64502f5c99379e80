// Command-line front end: loads scenario/profile/grid files, runs the
// footprint and performance models, and emits reports plus plot-ready CSV.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "hmasim/hmasim.hpp"

namespace fs = std::filesystem;
using hmasim::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitInternal = 4;

struct GlobalOpts {
  std::string scenario_path;
  std::string profile_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::string stdout_format = "json";
};

std::string resolve_profile(const GlobalOpts& g) {
  if (!g.profile_path.empty()) return g.profile_path;
  if (const char* env = std::getenv("HMASIM_PROFILE"); env != nullptr && *env != '\0') {
    return env;
  }
  throw hmasim::SchemaError("no technology profile: pass --profile or set HMASIM_PROFILE");
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

void write_json_file(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

/// Run provenance: inputs, resolved configuration, and produced files.
/// Reports reference this file by name; the timestamp lives only here so
/// report payloads stay byte-reproducible.
json make_manifest(const std::string& command, const GlobalOpts& g, json inputs, json resolved,
                   std::vector<std::string> outputs) {
  return json{{"schema_version", hmasim::kSchemaVersion},
              {"tool", "hmasim"},
              {"tool_version", hmasim::kVersion},
              {"command", command},
              {"generated_at", iso_timestamp()},
              {"seed", g.seed},
              {"inputs", std::move(inputs)},
              {"resolved", std::move(resolved)},
              {"outputs", std::move(outputs)}};
}

void emit(const GlobalOpts& g, const json& payload, const std::string& csv = "") {
  if (g.stdout_format == "csv" && !csv.empty()) {
    std::cout << csv;
  } else {
    std::cout << payload.dump(2) << "\n";
  }
}

// --- footprint ----------------------------------------------------------------

int cmd_footprint(const GlobalOpts& g, const std::string& placement_arg,
                  const std::string& fmt_arg, const std::string& accounting_arg) {
  const hmasim::ScenarioConfig sc = hmasim::load_scenario(g.scenario_path);
  const auto accounting = hmasim::parse_accounting(accounting_arg);

  std::vector<hmasim::Placement> placements;
  if (placement_arg == "both") {
    placements = {hmasim::Placement::adapter_albert, hmasim::Placement::vanilla_albert};
  } else {
    placements = {hmasim::parse_placement(placement_arg)};
  }
  std::vector<hmasim::FixedPointFormat> fmts;
  if (fmt_arg == "all") {
    fmts = {hmasim::FixedPointFormat::fp32(), hmasim::FixedPointFormat::q3_13(),
            hmasim::FixedPointFormat::q3_5()};
  } else {
    fmts = {hmasim::parse_format(fmt_arg)};
  }

  constexpr double kMiB = 1048576.0;
  json rows = json::array();
  std::ostringstream table;
  table << std::left << std::setw(16) << "placement" << std::setw(8) << "fmt" << std::right
        << std::setw(12) << "mlc_mib" << std::setw(12) << "slc_mib" << std::setw(12) << "sram_mib"
        << "\n";
  for (const auto placement : placements) {
    for (const auto fmt : fmts) {
      const hmasim::FootprintRequirement req =
          hmasim::footprint(sc.model, sc.tasks, sc.s_embd, sc.s_tf, fmt, placement, accounting);
      json row = hmasim::footprint_to_json(req);
      row["placement"] = hmasim::to_string(placement);
      row["fmt"] = hmasim::to_string(fmt);
      row["accounting"] = hmasim::to_string(accounting);
      rows.push_back(row);
      table << std::left << std::setw(16) << hmasim::to_string(placement) << std::setw(8)
            << hmasim::to_string(fmt) << std::right << std::fixed << std::setprecision(3)
            << std::setw(12) << req.mlc_bytes / kMiB << std::setw(12) << req.slc_bytes / kMiB
            << std::setw(12) << req.sram_bytes / kMiB << "\n";
    }
  }

  fs::create_directories(g.out_dir);
  const json payload{{"schema_version", hmasim::kSchemaVersion},
                     {"scenario_name", sc.name},
                     {"manifest", "manifest.json"},
                     {"accounting", hmasim::to_string(accounting)},
                     {"requirements", rows}};
  write_json_file(fs::path(g.out_dir) / "footprint.json", payload);
  write_json_file(fs::path(g.out_dir) / "manifest.json",
                  make_manifest("footprint", g,
                                json{{"scenario", g.scenario_path}},
                                json{{"scenario", hmasim::scenario_to_json(sc)}},
                                {"footprint.json"}));
  std::cout << table.str();
  emit(g, payload);
  return 0;
}

// --- simulate ------------------------------------------------------------------

json simulate_into(const GlobalOpts& g, const hmasim::ScenarioConfig& sc,
                   const hmasim::TechnologySet& techs,
                   const std::optional<hmasim::ScenarioConfig>& baseline, const fs::path& dir,
                   const json& input_echo) {
  hmasim::CostReport report = hmasim::run_scenario(sc, techs);
  if (baseline) {
    const hmasim::CostReport base = hmasim::run_scenario(*baseline, techs);
    report.normalized.push_back(hmasim::compare(report, base));
  }
  fs::create_directories(dir);
  const json report_json = hmasim::report_to_json(report, "manifest.json");
  write_json_file(dir / "report.json", report_json);
  write_text(dir / "report.csv", hmasim::report_to_csv(report));
  json resolved{{"scenario", hmasim::scenario_to_json(sc)}};
  if (baseline) resolved["baseline"] = hmasim::scenario_to_json(*baseline);
  write_json_file(dir / "manifest.json",
                  make_manifest("simulate", g, input_echo, resolved, {"report.json", "report.csv"}));
  return report_json;
}

int cmd_simulate(const GlobalOpts& g, const std::string& baseline_path) {
  const hmasim::ScenarioConfig sc = hmasim::load_scenario(g.scenario_path);
  const hmasim::TechnologySet techs = hmasim::load_technology_set(resolve_profile(g));
  std::optional<hmasim::ScenarioConfig> baseline;
  json inputs{{"scenario", g.scenario_path}, {"profile", resolve_profile(g)}};
  if (!baseline_path.empty()) {
    baseline = hmasim::load_scenario(baseline_path);
    inputs["baseline"] = baseline_path;
  }
  const json report_json = simulate_into(g, sc, techs, baseline, g.out_dir, inputs);
  std::ifstream csv(fs::path(g.out_dir) / "report.csv");
  std::stringstream csv_text;
  csv_text << csv.rdbuf();
  emit(g, report_json, csv_text.str());
  return 0;
}

// --- csp / vase ------------------------------------------------------------------

int cmd_csp(const GlobalOpts& g, const std::string& grid_path, double baseline_accuracy,
            double p_embd, double p_tf, bool have_p) {
  const auto grid = hmasim::load_sparsity_grid(grid_path);
  if (!have_p) {
    if (g.scenario_path.empty()) {
      throw hmasim::SchemaError("csp: pass --p-embd/--p-tf or --scenario to derive them");
    }
    const hmasim::ScenarioConfig sc = hmasim::load_scenario(g.scenario_path);
    const hmasim::PartitionedCounts counts =
        hmasim::count_partition(sc.model, hmasim::worst_case_task(sc.model, sc.tasks));
    p_embd = counts.p_embd();
    p_tf = counts.p_tf();
  }
  const hmasim::CspResult result = hmasim::find_csp_2d(grid, baseline_accuracy, p_embd, p_tf);
  emit(g, json{{"s_embd", result.point.s_embd},
               {"s_tf", result.point.s_tf},
               {"accuracy", result.point.accuracy},
               {"cumulative_sparsity", result.cumulative},
               {"fallback", result.fallback},
               {"p_embd", p_embd},
               {"p_tf", p_tf},
               {"baseline_accuracy", baseline_accuracy}});
  return 0;
}

int cmd_vase(const GlobalOpts& g, const std::string& grid_path, double baseline_accuracy,
             const std::string& mode_arg) {
  const auto grid = hmasim::load_accuracy_grid(grid_path);
  const hmasim::VaseMode mode = mode_arg == "argmax" ? hmasim::VaseMode::argmax
                                                     : hmasim::VaseMode::smallest_meeting;
  const std::uint64_t size = hmasim::vase_select(grid, baseline_accuracy, mode);
  emit(g, json{{"adapter_size", size},
               {"mode", mode_arg},
               {"baseline_accuracy", baseline_accuracy},
               {"accuracy", grid.at(size)}});
  return 0;
}

// --- tensor plumbing ---------------------------------------------------------------

int cmd_encode(const GlobalOpts& g, const std::string& input, const std::string& output,
               const std::string& fmt_arg) {
  const hmasim::Tensor2D t = hmasim::load_tensor(input);
  const hmasim::FixedPointFormat fmt = hmasim::parse_format(fmt_arg);
  const hmasim::SparseTensor s = hmasim::bitmask_encode(t);
  hmasim::write_sparse_file(output, s, fmt);
  emit(g, json{{"rows", s.rows},
               {"cols", s.cols},
               {"nonzeros", s.values.size()},
               {"bitmask_bytes", s.bitmask.size()},
               {"value_width_bits", fmt.width()},
               {"output", output}});
  return 0;
}

int cmd_decode(const GlobalOpts& g, const std::string& input, const std::string& output,
               const std::string& deficit_arg) {
  const auto [s, fmt] = hmasim::read_sparse_file(input);
  const hmasim::DeficitPolicy policy = deficit_arg == "zero-fill" ? hmasim::DeficitPolicy::zero_fill
                                                                  : hmasim::DeficitPolicy::error;
  const hmasim::Tensor2D t = hmasim::bitmask_decode(s, policy);
  write_json_file(output, hmasim::tensor_to_json(t));
  emit(g, json{{"rows", t.rows},
               {"cols", t.cols},
               {"nonzeros", s.values.size()},
               {"value_width_bits", fmt.width()},
               {"deficit_policy", deficit_arg},
               {"output", output}});
  return 0;
}

int cmd_quantize(const GlobalOpts& g, const std::string& input, const std::string& output,
                 const std::string& fmt_arg) {
  const hmasim::Tensor2D t = hmasim::load_tensor(input);
  const hmasim::FixedPointFormat fmt = hmasim::parse_format(fmt_arg);
  const hmasim::Tensor2D q = hmasim::quantize(t, fmt);
  write_json_file(output, hmasim::tensor_to_json(q));
  double max_err = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    max_err = std::max(max_err, std::abs(t.data[k] - q.data[k]));
  }
  emit(g, json{{"fmt", hmasim::to_string(fmt)},
               {"rows", q.rows},
               {"cols", q.cols},
               {"max_abs_error", max_err},
               {"output", output}});
  return 0;
}

int cmd_inject(const GlobalOpts& g, const std::string& input, const std::string& output,
               const std::string& target_arg, std::int64_t position) {
  const auto [s, fmt] = hmasim::read_sparse_file(input);
  const hmasim::FaultTarget target =
      target_arg == "values" ? hmasim::FaultTarget::values : hmasim::FaultTarget::bitmask;
  const std::size_t bit_space = target == hmasim::FaultTarget::bitmask
                                    ? s.bit_count()
                                    : s.values.size() * static_cast<std::size_t>(fmt.width());
  if (bit_space == 0) throw hmasim::SchemaError("inject: tensor has no bits in target '" + target_arg + "'");
  std::size_t pos;
  if (position >= 0) {
    pos = static_cast<std::size_t>(position);
  } else {
    std::mt19937_64 rng(g.seed);
    pos = std::uniform_int_distribution<std::size_t>(0, bit_space - 1)(rng);
  }
  const hmasim::FaultInjection result = hmasim::inject_fault(s, target, pos, fmt);
  hmasim::write_sparse_file(output, result.corrupted, fmt);
  emit(g, json{{"target", target_arg},
               {"position_bit", pos},
               {"corruption", result.corruption},
               {"popcount_before", s.popcount()},
               {"popcount_after", result.corrupted.popcount()},
               {"output", output}});
  return 0;
}

// --- sweep -----------------------------------------------------------------------

int cmd_sweep(const GlobalOpts& g, const std::vector<std::string>& scenario_paths,
              const std::string& baseline_path, unsigned jobs) {
  const hmasim::TechnologySet techs = hmasim::load_technology_set(resolve_profile(g));
  std::optional<hmasim::ScenarioConfig> baseline;
  if (!baseline_path.empty()) baseline = hmasim::load_scenario(baseline_path);

  struct Slot {
    std::string path;
    json summary;
    std::exception_ptr error;
  };
  std::vector<Slot> slots(scenario_paths.size());
  for (std::size_t i = 0; i < scenario_paths.size(); ++i) slots[i].path = scenario_paths[i];

  std::atomic<std::size_t> next{0};
  const unsigned worker_count =
      std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(scenario_paths.size())));
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= slots.size()) return;
      Slot& slot = slots[i];
      try {
        const hmasim::ScenarioConfig sc = hmasim::load_scenario(slot.path);
        const fs::path dir = fs::path(g.out_dir) / sc.name;
        json inputs{{"scenario", slot.path}, {"profile", resolve_profile(g)}};
        if (baseline) inputs["baseline"] = baseline_path;
        const json report = simulate_into(g, sc, techs, baseline, dir, inputs);
        slot.summary = json{{"name", sc.name},
                            {"out_dir", dir.string()},
                            {"area_mm2", report.at("area_mm2")},
                            {"energy_per_inference_pj", report.at("energy_per_inference_pj")},
                            {"latency_per_inference_ns", report.at("latency_per_inference_ns")}};
      } catch (...) {
        slot.error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < worker_count; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  json results = json::array();
  for (Slot& slot : slots) {
    if (slot.error) std::rethrow_exception(slot.error);
    results.push_back(std::move(slot.summary));
  }
  emit(g, json{{"scenarios", results}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heterogeneous-memory multi-task inference cost model"};
  app.set_version_flag("--version", std::string(hmasim::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--scenario", g.scenario_path, "scenario JSON file");
  app.add_option("--profile", g.profile_path,
                 "technology profile JSON (default: $HMASIM_PROFILE)");
  app.add_option("--out-dir", g.out_dir, "directory for report files")->capture_default_str();
  app.add_option("--seed", g.seed, "seed for randomized choices")->capture_default_str();
  app.add_option("--format", g.stdout_format, "stdout payload format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  auto* footprint = app.add_subcommand("footprint", "capacity requirements per technology");
  std::string fp_placement = "both", fp_fmt = "all", fp_accounting = "paper-parity";
  footprint->add_option("--placement", fp_placement, "adapter-albert, vanilla-albert, or both")
      ->check(CLI::IsMember({"both", "adapter-albert", "vanilla-albert"}))
      ->capture_default_str();
  footprint->add_option("--fmt", fp_fmt, "fp32, q3_13, q3_5, or all")->capture_default_str();
  footprint->add_option("--accounting", fp_accounting, "paper-parity or full")
      ->check(CLI::IsMember({"paper-parity", "full"}))
      ->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "area / energy / latency report");
  std::string sim_baseline;
  simulate->add_option("--baseline", sim_baseline, "baseline scenario for normalized ratios");

  auto* csp = app.add_subcommand("csp", "critical sparsity point from a measured grid");
  std::string csp_grid;
  double csp_baseline = 0.0, csp_pe = 0.0, csp_pt = 0.0;
  csp->add_option("--grid", csp_grid, "CSV with header s_embd,s_tf,accuracy")->required();
  csp->add_option("--baseline-accuracy", csp_baseline, "accuracy the pruned model must keep")
      ->required();
  auto* pe_opt = csp->add_option("--p-embd", csp_pe, "embedding fraction of total parameters");
  auto* pt_opt = csp->add_option("--p-tf", csp_pt, "transformer fraction of total parameters");
  pe_opt->needs(pt_opt);
  pt_opt->needs(pe_opt);

  auto* vase = app.add_subcommand("vase", "pick an adapter size from an accuracy table");
  std::string vase_grid, vase_mode = "smallest-meeting";
  double vase_baseline = 0.0;
  vase->add_option("--grid", vase_grid, "CSV with header adapter_size,accuracy")->required();
  vase->add_option("--baseline-accuracy", vase_baseline, "target accuracy")->required();
  vase->add_option("--mode", vase_mode, "smallest-meeting or argmax")
      ->check(CLI::IsMember({"smallest-meeting", "argmax"}))
      ->capture_default_str();

  auto* encode = app.add_subcommand("encode", "dense tensor JSON -> bitmask sparse file");
  std::string enc_in, enc_out, enc_fmt = "fp32";
  encode->add_option("--input", enc_in, "tensor JSON")->required();
  encode->add_option("--output", enc_out, "sparse binary output")->required();
  encode->add_option("--fmt", enc_fmt, "value format (fp32, q3_13, q3_5)")->capture_default_str();

  auto* decode = app.add_subcommand("decode", "bitmask sparse file -> dense tensor JSON");
  std::string dec_in, dec_out, dec_deficit = "error";
  decode->add_option("--input", dec_in, "sparse binary file")->required();
  decode->add_option("--output", dec_out, "tensor JSON output")->required();
  decode->add_option("--deficit", dec_deficit, "error or zero-fill")
      ->check(CLI::IsMember({"error", "zero-fill"}))
      ->capture_default_str();

  auto* quant = app.add_subcommand("quantize", "fixed-point quantization of a tensor JSON");
  std::string q_in, q_out, q_fmt = "q3_13";
  quant->add_option("--input", q_in, "tensor JSON")->required();
  quant->add_option("--output", q_out, "tensor JSON output")->required();
  quant->add_option("--fmt", q_fmt, "target format")->capture_default_str();

  auto* inject = app.add_subcommand("inject", "flip one stored bit and report the damage");
  std::string inj_in, inj_out, inj_target = "bitmask";
  std::int64_t inj_position = -1;
  inject->add_option("--input", inj_in, "sparse binary file")->required();
  inject->add_option("--output", inj_out, "corrupted sparse binary output")->required();
  inject->add_option("--target", inj_target, "bitmask or values")
      ->check(CLI::IsMember({"bitmask", "values"}))
      ->capture_default_str();
  inject->add_option("--position", inj_position, "bit position (default: seeded random)");

  auto* sweep = app.add_subcommand("sweep", "simulate several scenarios on a worker pool");
  std::vector<std::string> sweep_scenarios;
  std::string sweep_baseline;
  unsigned sweep_jobs = std::max(1u, std::thread::hardware_concurrency());
  sweep->add_option("--scenarios", sweep_scenarios, "scenario JSON files")
      ->required()
      ->expected(-1);
  sweep->add_option("--baseline", sweep_baseline, "baseline scenario applied to every run");
  sweep->add_option("--jobs", sweep_jobs, "worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (footprint->parsed()) {
      if (g.scenario_path.empty()) throw hmasim::SchemaError("footprint: --scenario is required");
      return cmd_footprint(g, fp_placement, fp_fmt, fp_accounting);
    }
    if (simulate->parsed()) {
      if (g.scenario_path.empty()) throw hmasim::SchemaError("simulate: --scenario is required");
      return cmd_simulate(g, sim_baseline);
    }
    if (csp->parsed()) {
      return cmd_csp(g, csp_grid, csp_baseline, csp_pe, csp_pt, pe_opt->count() > 0);
    }
    if (vase->parsed()) return cmd_vase(g, vase_grid, vase_baseline, vase_mode);
    if (encode->parsed()) return cmd_encode(g, enc_in, enc_out, enc_fmt);
    if (decode->parsed()) return cmd_decode(g, dec_in, dec_out, dec_deficit);
    if (quant->parsed()) return cmd_quantize(g, q_in, q_out, q_fmt);
    if (inject->parsed()) return cmd_inject(g, inj_in, inj_out, inj_target, inj_position);
    if (sweep->parsed()) return cmd_sweep(g, sweep_scenarios, sweep_baseline, sweep_jobs);
  } catch (const hmasim::SchemaError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
