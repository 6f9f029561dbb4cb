#pragma once

#include <cstdint>
#include <vector>

#include "ava/isa.hpp"

namespace ava
{

/// Register-grouping geometry: LMUL registers fuse into one group, so the
/// logical and physical group counts both shrink by LMUL.
struct LmulConfig
{
  std::uint32_t lmul = 1;
  std::size_t logical_groups = 32;
  std::size_t physical_groups = 64;
  std::size_t initial_mapped = 32;
  std::size_t initial_free = 32;
};

/// Throws ConfigError unless lmul is 1, 2, 4 or 8.
LmulConfig lmul_config(std::uint32_t lmul);

/// Lifetime of one value of the loop body.
struct LiveRange
{
  LogicalReg reg{};
  std::size_t def = 0;        // defining body index; 0 for entry values
  std::size_t last_use = 0;   // last body index reading the value (>= def)
  bool entry = false;         // value exists before the body and is never written in it
  bool wraps = false;         // value survives into the next iteration
  std::size_t entry_use = 0;  // wraps: last read before the first write of the register
};

/// One range per definition plus one per entry value. A register read before
/// its first write is carried around the loop (or comes from `.init`); a
/// register read but never written and never initialised is a KernelError.
std::vector<LiveRange> liveness(const Kernel& k);

/// Largest number of values simultaneously live at any body instruction in
/// the steady-state loop, counting the value it defines. Loop-invariant
/// entry values are live throughout.
std::size_t max_pressure(const Kernel& k);

/// Rewrite `k` to use only the 32/lmul group registers, inserting
/// `vstore.spill` / `vload.spill` code (furthest-next-use eviction). Kernels
/// that already fit are only renumbered.
Kernel lower_with_lmul(const Kernel& k, std::uint32_t lmul);

struct SpillCount
{
  std::size_t loads = 0;
  std::size_t stores = 0;
  std::size_t total() const { return loads + stores; }
};

/// Static spill instructions in a kernel body.
SpillCount count_spills(const Kernel& k);

} // namespace ava
