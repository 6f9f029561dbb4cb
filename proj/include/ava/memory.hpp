#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "ava/isa.hpp"

namespace ava
{

/// Simulated data memory holding the kernel arrays.
///
/// Arrays are laid out contiguously from kArrayBase (byte addresses, 64-byte
/// aligned). Contents are seeded pseudo-random unless the declaration carries
/// a fill value. Stores may be tagged with a dynamic instruction index so that
/// squashed stores can be rolled back.
class SimMemory
{
public:
  static constexpr std::uint64_t kArrayBase = 0x1000;

  SimMemory() = default;
  SimMemory(const std::vector<ResolvedArray>& arrays, std::uint64_t seed);

  std::size_t array_count() const noexcept { return data_.size(); }
  std::span<const Word> array(std::size_t a) const { return data_.at(a); }
  const std::string& array_name(std::size_t a) const { return names_.at(a); }
  bool is_spill_slot(std::size_t a) const { return spill_.at(a); }

  /// Byte address of element 0 of array `a`.
  std::uint64_t base_address(std::size_t a) const { return bases_.at(a); }
  /// One past the last byte used by arrays.
  std::uint64_t end_address() const noexcept { return end_; }
  /// True if [addr, addr+bytes) overlaps any declared array.
  bool overlaps(std::uint64_t addr, std::uint64_t bytes) const;

  Word read(std::size_t a, std::int64_t elem) const;
  /// Write one element; when `tag` is set, the previous value is logged.
  void write(std::size_t a, std::int64_t elem, Word value, std::optional<std::uint64_t> tag);

  /// Forget undo entries with tag <= seq (those stores committed).
  void retire_through(std::uint64_t seq);
  /// Undo every logged store with tag > seq, youngest first.
  void rollback_after(std::uint64_t seq);
  std::size_t pending_undo() const noexcept { return undo_.size(); }

  bool operator==(const SimMemory& o) const { return data_ == o.data_; }

private:
  struct Undo
  {
    std::uint64_t tag;
    std::size_t array;
    std::int64_t elem;
    Word old;
  };

  std::vector<std::vector<Word>> data_;
  std::vector<std::string> names_;
  std::vector<bool> spill_;
  std::vector<std::uint64_t> bases_;
  std::uint64_t end_ = kArrayBase;
  std::deque<Undo> undo_;
};

/// Deterministic initial contents shared by the simulator and the reference.
std::vector<Word> initial_array_contents(const ResolvedArray& a, std::size_t index,
                                         std::uint64_t seed);

} // namespace ava
