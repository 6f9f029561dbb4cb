#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "ava/rename.hpp"

namespace ava
{

/// Second-level mapping: VVR -> physical register (PRMT), residence bit
/// (VRLT, 1 = in the P-VRF), and the physical free list (PFRL).
struct MapState
{
  std::size_t pregs = 0;
  std::size_t virtuals = kVirtualRegs;
  std::uint32_t mvl = 16;
  std::vector<Preg> prmt;
  std::vector<bool> vrlt;
  std::deque<Preg> pfrl;
  /// Reverse of PRMT restricted to residents.
  std::vector<std::optional<Vvr>> owner;

  /// M-VRF slot holds the VVR's current value (VVRs are written once per
  /// allocation, so a slot stays current until the VVR is reallocated).
  std::vector<bool> slot_current;
  /// Evict clean victims without a Swap-Store.
  bool elide_clean_stores = false;

  std::uint64_t swap_loads = 0;
  std::uint64_t swap_stores = 0;
  std::uint64_t elided_stores = 0;

  /// No VVR resident; every physical register free, in ascending order.
  static MapState initial(std::size_t pregs, std::uint32_t mvl,
                          std::size_t virtuals = kVirtualRegs);

  bool resident(Vvr v) const { return vrlt[idx(v)]; }
  std::size_t resident_count() const;

  /// Make `v` resident in `p` (p must already be off the free list).
  void bind(Vvr v, Preg p);
  /// Drop residence of `v`; returns its former physical register.
  Preg unbind(Vvr v);
  /// Take a specific register off the free list (used to pre-seed state).
  void take(Preg p);

  /// residents + free == pregs, PRMT injective over residents.
  void check_partition() const;
  nlohmann::json dump_json() const;
};

enum class SwapKind : std::uint8_t { Store, Load };

struct SwapOp
{
  SwapKind kind = SwapKind::Store;
  Vvr vvr{};
  Preg phys{};
  std::uint32_t width = 0;   // always the configured MVL
};

/// Hooks the pre-issue stage supplies to the mapping engine.
struct MapPolicy
{
  /// Extra victim filter (the pipeline passes "producer has executed").
  std::function<bool(Vvr)> victim_eligible;
  /// True when some resident VVR is guaranteed to be reclaimed without any
  /// further pre-issue progress; the mapper then waits instead of swapping.
  std::function<bool()> reclaim_pending;
};

/// Resident VVR with the smallest count >= 1, not in `forbidden`; ties go to
/// the lowest VVR id.
std::optional<Vvr> select_victim(const MapState& ms, std::span<const int> rac,
                                 std::span<const Vvr> forbidden,
                                 const std::function<bool(Vvr)>& eligible = {});

/// Resumable per-instruction pre-issue progress.
struct PreissueProgress
{
  std::uint8_t next_src = 0;
  Preg src_phys[3] = {};
  std::optional<Preg> dest_phys;
};

struct MapStep
{
  bool complete = false;
  std::vector<SwapOp> swaps;
  /// Physical registers handed to a new writer in this step (destination or
  /// swap-load target), in emission order.
  std::vector<Preg> allocated;
  /// Every VVR evicted in this step, including those whose store was elided.
  std::vector<Vvr> evicted;
};

/// Map every source of `ri` to a physical register, swapping in VVRs held in
/// the M-VRF. Emits at most `swap_budget` swap operations; returns
/// complete=false when it ran out of budget or had to wait.
MapStep map_sources(const RenamedInstr& ri, PreissueProgress& prog, MapState& ms,
                    const RenameState& rs, std::size_t swap_budget, const MapPolicy& policy = {});

/// Bind a physical destination for `ri`, evicting a victim if the PFRL is empty.
MapStep allocate_dest(const RenamedInstr& ri, PreissueProgress& prog, MapState& ms,
                      const RenameState& rs, std::size_t swap_budget,
                      const MapPolicy& policy = {});

/// Aggressive reclamation: every resident VVR whose count is zero, which is
/// no longer architecturally mapped and whose producer has executed, gives its
/// physical register back to the PFRL when `may_reclaim` allows it.
std::vector<Preg> reclaim(MapState& ms, const RenameState& rs,
                          const std::function<bool(Vvr)>& may_reclaim);

/// Same, with the single pipeline-wide "older vector memory instruction
/// present" condition.
std::vector<Preg> reclaim(MapState& ms, const RenameState& rs, bool older_memory_in_flight);

} // namespace ava
