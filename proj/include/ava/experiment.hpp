#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ava/isa.hpp"
#include "ava/machine.hpp"
#include "ava/vrf.hpp"

namespace ava
{

/// One column of the configuration grid, e.g. "AVA-X4" or "RG-LMUL2".
struct ConfigCell
{
  std::string label;
  Mode mode = Mode::Ava;
  std::uint32_t mvl = 16;
  std::uint32_t lmul = 1;
};

/// NATIVE X{1,2,3,4,8}, AVA X{1,2,3,4,8}, RG-LMUL{1,2,4,8}. Xn means MVL 16n.
const std::vector<ConfigCell>& standard_cells();

/// Parse a label ("NATIVE-X1", "AVA-X3", "RG-LMUL8"). Throws ConfigError.
ConfigCell parse_cell(const std::string& label);

struct RunParams
{
  std::uint64_t elements = 1u << 16;          // per array, used when iterations is unset
  std::optional<std::uint64_t> iterations;
  std::optional<std::uint32_t> vl;            // defaults to the cell's MVL
  std::vector<std::uint64_t> flush_at;
  std::uint64_t seed = 1;
  bool check_invariants = false;
  bool verify = true;                         // compare against the reference interpreter
};

struct CellResult
{
  std::string kernel;
  ConfigCell cell;
  std::uint32_t vl = 0;
  std::uint64_t iterations = 0;
  std::uint64_t elements = 0;                 // elements processed per array
  SimStats stats;
  bool oracle_ok = true;
  std::string oracle_report;
  double speedup = 0.0;                       // filled by the sweep
};

/// Seed from AVA_SEED when set, otherwise `fallback`.
std::uint64_t seed_from_env(std::uint64_t fallback = 1);

/// Lower (RG), expand, simulate and check one cell. Parameter conflicts
/// (e.g. vl > mvl) throw before simulation starts.
CellResult run_cell(const ConfigCell& cell, const std::string& kernel_name, const Kernel& kernel,
                    const RunParams& params);

/// Cycles per element of `baseline` over cycles per element of `r`.
double speedup(const CellResult& baseline, const CellResult& r);

/// Non-spill arrays of the final simulated memory against the reference;
/// returns an empty string on a match, otherwise a short diff report.
std::string compare_with_reference(const SimMemory& mem, const Kernel& kernel, std::uint32_t vl,
                                   std::uint64_t iterations, std::uint32_t mvl, std::uint64_t seed);

struct SweepMatrix
{
  std::vector<ConfigCell> cells;
  std::vector<std::pair<std::string, Kernel>> kernels;
  RunParams params;
};

/// "full" (all cells x all presets) or a JSON file
/// {"cells": [...], "kernels": [...], "elements": n, "check_invariants": b}.
SweepMatrix load_matrix(const std::string& preset_or_file);

struct SweepReport
{
  std::vector<CellResult> rows;   // kernel-major, cells in matrix order
  bool all_ok = true;
};

/// Runs every kernel x cell on up to `jobs` threads (0 = hardware threads).
/// Speedups are relative to NATIVE-X1 of the same kernel, which is run even
/// when the matrix omits it.
SweepReport sweep(const SweepMatrix& m, unsigned jobs = 0);

std::string to_csv(const SweepReport& r);
nlohmann::json to_json(const SweepReport& r);
nlohmann::json to_json(const CellResult& r);

} // namespace ava
