#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "ava/memory.hpp"
#include "ava/types.hpp"

namespace ava
{

enum class Mode : std::uint8_t { Ava, Native, Rg };

std::string_view mode_name(Mode m);
Mode parse_mode(std::string_view s);

/// Vector register file geometry for one machine configuration.
struct VrfConfig
{
  std::uint32_t mvl = 16;
  std::size_t pregs = 64;
  std::size_t lanes = 8;
  std::size_t pvrf_capacity = 1024;   // elements (8 KB of 64-bit words)
  Mode mode = Mode::Ava;
  std::uint32_t lmul = 1;
};

/// AVA and RG share the fixed 8 KB P-VRF, so pregs = capacity / mvl.
/// NATIVE keeps 64 registers and grows the file with the MVL.
VrfConfig configure(std::uint32_t mvl, Mode mode, std::uint32_t lmul = 1, std::size_t lanes = 8,
                    std::size_t pvrf_capacity = 1024);

/// Cycles a lane-striped register access occupies: ceil(vl / lanes).
inline std::size_t access_cycles(std::size_t vl, std::size_t lanes) { return ceil_div(vl, lanes); }

/// Element e of a register lives in lane e % lanes.
inline std::size_t lane_of(std::size_t element, std::size_t lanes) { return element % lanes; }

/// The physical vector register file. Registers are `mvl` words wide; writes
/// of `vl` elements zero the tail. Registers sitting in the free list are
/// flagged and any read of them is an invariant violation.
class PVrf
{
public:
  PVrf() = default;
  explicit PVrf(const VrfConfig& cfg);

  std::size_t pregs() const noexcept { return pregs_; }
  std::uint32_t mvl() const noexcept { return mvl_; }

  std::span<const Word> read_register(Preg p, std::size_t vl) const;
  void write_register(Preg p, std::span<const Word> data, std::size_t vl);

  void mark_free(Preg p, bool is_free) { free_.at(idx(p)) = is_free; }
  bool is_free(Preg p) const { return free_.at(idx(p)); }

  nlohmann::json dump_json() const;

private:
  void check(Preg p, std::size_t vl) const;

  std::size_t pregs_ = 0;
  std::uint32_t mvl_ = 0;
  std::vector<Word> storage_;
  std::vector<bool> free_;
};

/// The memory-backed VRF: one MVL-wide slot per VVR at base + vvr*mvl*8.
class MVrf
{
public:
  MVrf() = default;
  MVrf(std::size_t virtuals, std::uint32_t mvl) : virtuals_(virtuals), mvl_(mvl) {}

  /// Reserve the region. Throws ConfigError if it overlaps a kernel array.
  void set_base(std::uint64_t addr, const SimMemory& mem);
  std::optional<std::uint64_t> base() const noexcept { return base_; }
  std::uint64_t region_bytes() const noexcept { return virtuals_ * mvl_ * kWordBytes; }
  std::uint64_t slot_address(Vvr v) const;

  std::span<const Word> slot(Vvr v) const;
  std::span<Word> slot(Vvr v);

private:
  std::size_t virtuals_ = 0;
  std::uint32_t mvl_ = 0;
  std::optional<std::uint64_t> base_;
  std::vector<Word> storage_;
};

/// MVL-wide copy P-VRF -> M-VRF slot.
void swap_store_exec(const PVrf& pvrf, Preg from, MVrf& mvrf, Vvr v);
/// MVL-wide copy M-VRF slot -> P-VRF.
void swap_load_exec(const MVrf& mvrf, Vvr v, PVrf& pvrf, Preg to);

} // namespace ava
