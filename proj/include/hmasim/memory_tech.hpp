#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmasim {

enum class MemoryTechKind { sram, slc_rram, mlc_rram, dram };

inline std::string to_string(MemoryTechKind k) {
  switch (k) {
    case MemoryTechKind::sram: return "sram";
    case MemoryTechKind::slc_rram: return "slc_rram";
    case MemoryTechKind::mlc_rram: return "mlc_rram";
    case MemoryTechKind::dram: return "dram";
  }
  return "unknown";
}

inline MemoryTechKind parse_tech_kind(const std::string& s) {
  if (s == "sram") return MemoryTechKind::sram;
  if (s == "slc_rram") return MemoryTechKind::slc_rram;
  if (s == "mlc_rram") return MemoryTechKind::mlc_rram;
  if (s == "dram") return MemoryTechKind::dram;
  throw std::invalid_argument("unknown memory technology '" + s + "'");
}

/// One memory macro the provisioner may instantiate. Bandwidth is in bytes
/// per nanosecond (numerically GB/s).
struct MacroSpec {
  std::uint64_t capacity_bytes = 0;
  double bandwidth_gb_per_s = 0.0;

  friend bool operator==(const MacroSpec&, const MacroSpec&) = default;
};

/// Per-technology cost parameters plus the catalog of macro sizes available
/// in that technology.
struct MemoryTechProfile {
  MemoryTechKind kind = MemoryTechKind::sram;
  int bits_per_cell = 1;  // 2 for MLC
  double read_energy_pj_per_bit = 0.0;
  double write_energy_pj_per_bit = 0.0;
  double read_latency_ns = 0.0;
  double write_latency_ns = 0.0;
  double leakage_pw_per_byte = 0.0;  // 0 for the non-volatile kinds
  double area_um2_per_byte = 0.0;    // per byte of cell capacity; 0 for off-chip
  std::vector<MacroSpec> macro_catalog;

  void validate() const {
    const double costs[] = {read_energy_pj_per_bit, write_energy_pj_per_bit, read_latency_ns,
                            write_latency_ns,       leakage_pw_per_byte,     area_um2_per_byte};
    for (double c : costs) {
      if (c < 0.0) throw std::invalid_argument(to_string(kind) + ": costs must be >= 0");
    }
    if (bits_per_cell != 1 && bits_per_cell != 2) {
      throw std::invalid_argument(to_string(kind) + ": bits_per_cell must be 1 or 2");
    }
    const bool non_volatile =
        kind == MemoryTechKind::slc_rram || kind == MemoryTechKind::mlc_rram;
    if (non_volatile && leakage_pw_per_byte != 0.0) {
      throw std::invalid_argument(to_string(kind) + ": non-volatile kinds do not leak");
    }
    for (const MacroSpec& m : macro_catalog) {
      if (m.capacity_bytes == 0 || m.bandwidth_gb_per_s < 0.0) {
        throw std::invalid_argument(to_string(kind) + ": malformed macro catalog entry");
      }
    }
  }
};

/// The technologies one simulated system draws from.
struct TechnologySet {
  MemoryTechProfile sram;
  MemoryTechProfile slc_rram;
  MemoryTechProfile mlc_rram;
  MemoryTechProfile dram;

  const MemoryTechProfile& by_kind(MemoryTechKind k) const {
    switch (k) {
      case MemoryTechKind::sram: return sram;
      case MemoryTechKind::slc_rram: return slc_rram;
      case MemoryTechKind::mlc_rram: return mlc_rram;
      case MemoryTechKind::dram: return dram;
    }
    throw std::logic_error("TechnologySet: unknown kind");
  }

  void validate() const {
    sram.validate();
    slc_rram.validate();
    mlc_rram.validate();
    dram.validate();
  }
};

}  // namespace hmasim
