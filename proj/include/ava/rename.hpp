#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include <json.hpp>

#include "ava/isa.hpp"

namespace ava
{

/// First-level rename tables: logical register -> VVR.
///
/// The RAC counts, per VVR, one reference for being the current mapping of a
/// logical register plus one per renamed-but-uncommitted reader. Counters are
/// plain ints; `rac_limit` models the hardware counter width and renaming
/// stalls rather than exceed it.
struct RenameState
{
  std::size_t logical = kLogicalRegs;
  std::size_t virtuals = kVirtualRegs;
  int rac_limit = 7;

  std::vector<Vvr> rat;
  std::deque<Vvr> frl;
  std::vector<int> rac;
  std::vector<bool> valid;
  /// Cleared for mappings restored by a recovery (their counts are stale)
  /// until the VVR is released and reallocated.
  std::vector<bool> rac_trusted;

  std::uint64_t next_rename_seq = 0;
  std::uint64_t next_commit_seq = 0;

  /// RAT[i] = i, FRL = {logical .. virtuals-1}, mapped VVRs valid with count 1.
  static RenameState initial(std::size_t logical = kLogicalRegs,
                             std::size_t virtuals = kVirtualRegs, int rac_limit = 7);

  bool in_frl(Vvr v) const;
  nlohmann::json dump_json() const;
};

struct RenamedInstr
{
  VecInstr base;
  std::uint64_t seq = 0;     // dynamic program-order index
  Vvr src_vvrs[3] = {};
  std::optional<Vvr> dest_vvr;
  std::optional<Vvr> old_dest_vvr;

  std::uint8_t nsrc() const noexcept { return base.nsrc; }
};

enum class RenameStall : std::uint8_t { None, FrlEmpty, RacLimit };

struct RenameOutcome
{
  std::optional<RenamedInstr> instr;
  RenameStall stall = RenameStall::None;
  /// VVRs whose counter dropped to zero during this rename.
  std::vector<Vvr> reached_zero;
};

/// Rename `instr`. On a stall the state is left untouched.
RenameOutcome rename(const VecInstr& instr, RenameState& st);

struct ReleaseOutcome
{
  std::optional<Vvr> freed;          // old destination returned to the FRL
  std::vector<Vvr> reached_zero;     // source counters that dropped to zero
};

/// In-order commit: release the old destination to the FRL (count reset to
/// zero) and drop each source's reader reference. Throws InvariantError when
/// called out of program order.
ReleaseOutcome commit_release(const RenamedInstr& ri, RenameState& st);

} // namespace ava
