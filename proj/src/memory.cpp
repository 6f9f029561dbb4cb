#include "ava/memory.hpp"

#include <random>
#include <string>

namespace ava
{

std::vector<Word> initial_array_contents(const ResolvedArray& a, std::size_t index,
                                         std::uint64_t seed)
{
  std::vector<Word> v(a.size);
  if (a.fill) {
    std::fill(v.begin(), v.end(), *a.fill);
    return v;
  }
  std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
  for (auto& w : v)
    w = rng();
  return v;
}

SimMemory::SimMemory(const std::vector<ResolvedArray>& arrays, std::uint64_t seed)
{
  std::uint64_t addr = kArrayBase;
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    data_.push_back(initial_array_contents(arrays[i], i, seed));
    names_.push_back(arrays[i].name);
    spill_.push_back(arrays[i].spill_slot);
    bases_.push_back(addr);
    addr += arrays[i].size * kWordBytes;
    addr = (addr + 63) & ~std::uint64_t{63};
  }
  end_ = addr;
}

bool SimMemory::overlaps(std::uint64_t addr, std::uint64_t bytes) const
{
  for (std::size_t i = 0; i < data_.size(); ++i) {
    std::uint64_t lo = bases_[i];
    std::uint64_t hi = lo + data_[i].size() * kWordBytes;
    if (addr < hi && lo < addr + bytes)
      return true;
  }
  return false;
}

Word SimMemory::read(std::size_t a, std::int64_t elem) const
{
  const auto& arr = data_.at(a);
  if (elem < 0 || static_cast<std::size_t>(elem) >= arr.size())
    throw SimFault("load outside array '" + names_[a] + "' at element " + std::to_string(elem));
  return arr[static_cast<std::size_t>(elem)];
}

void SimMemory::write(std::size_t a, std::int64_t elem, Word value,
                      std::optional<std::uint64_t> tag)
{
  auto& arr = data_.at(a);
  if (elem < 0 || static_cast<std::size_t>(elem) >= arr.size())
    throw SimFault("store outside array '" + names_[a] + "' at element " + std::to_string(elem));
  auto& slot = arr[static_cast<std::size_t>(elem)];
  if (tag)
    undo_.push_back({*tag, a, elem, slot});
  slot = value;
}

void SimMemory::retire_through(std::uint64_t seq)
{
  while (!undo_.empty() && undo_.front().tag <= seq)
    undo_.pop_front();
}

void SimMemory::rollback_after(std::uint64_t seq)
{
  while (!undo_.empty() && undo_.back().tag > seq) {
    const auto& u = undo_.back();
    data_[u.array][static_cast<std::size_t>(u.elem)] = u.old;
    undo_.pop_back();
  }
}

} // namespace ava
