#include "ava/vrf.hpp"

#include <algorithm>
#include <string>

namespace ava
{

std::string_view mode_name(Mode m)
{
  switch (m) {
  case Mode::Ava: return "ava";
  case Mode::Native: return "native";
  case Mode::Rg: return "rg";
  }
  return "?";
}

Mode parse_mode(std::string_view s)
{
  if (s == "ava" || s == "AVA")
    return Mode::Ava;
  if (s == "native" || s == "NATIVE")
    return Mode::Native;
  if (s == "rg" || s == "RG")
    return Mode::Rg;
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

VrfConfig configure(std::uint32_t mvl, Mode mode, std::uint32_t lmul, std::size_t lanes,
                    std::size_t pvrf_capacity)
{
  if (mvl < 16 || mvl > 128 || mvl % 16 != 0)
    throw ConfigError("MVL must be a multiple of 16 in [16, 128], got " + std::to_string(mvl));
  if (lanes == 0)
    throw ConfigError("lane count must be positive");
  VrfConfig c;
  c.mvl = mvl;
  c.lanes = lanes;
  c.pvrf_capacity = pvrf_capacity;
  c.mode = mode;
  c.lmul = 1;
  switch (mode) {
  case Mode::Native:
    c.pregs = kVirtualRegs;
    c.pvrf_capacity = kVirtualRegs * mvl;
    break;
  case Mode::Rg:
    if (lmul != 1 && lmul != 2 && lmul != 4 && lmul != 8)
      throw ConfigError("LMUL must be 1, 2, 4 or 8");
    if (mvl != 16 * lmul)
      throw ConfigError("RG requires MVL = 16 x LMUL");
    c.lmul = lmul;
    [[fallthrough]];
  case Mode::Ava:
    c.pregs = pvrf_capacity / mvl;
    break;
  }
  return c;
}

PVrf::PVrf(const VrfConfig& cfg)
  : pregs_(cfg.pregs), mvl_(cfg.mvl), storage_(cfg.pregs * cfg.mvl, 0), free_(cfg.pregs, false)
{}

void PVrf::check(Preg p, std::size_t vl) const
{
  if (idx(p) >= pregs_)
    throw SimFault("physical register " + std::to_string(idx(p)) + " out of range");
  if (vl > mvl_)
    throw SimFault("access of " + std::to_string(vl) + " elements exceeds MVL");
}

std::span<const Word> PVrf::read_register(Preg p, std::size_t vl) const
{
  check(p, vl);
  check_invariant(!free_[idx(p)], "read of a physical register sitting in the PFRL");
  return {storage_.data() + idx(p) * mvl_, vl};
}

void PVrf::write_register(Preg p, std::span<const Word> data, std::size_t vl)
{
  check(p, vl);
  if (data.size() < vl)
    throw SimFault("write_register: short data");
  Word* r = storage_.data() + idx(p) * mvl_;
  std::copy_n(data.begin(), vl, r);
  std::fill(r + vl, r + mvl_, Word{0});
}

nlohmann::json PVrf::dump_json() const
{
  nlohmann::json j = nlohmann::json::object();
  char buf[24];
  for (std::size_t p = 0; p < pregs_; ++p) {
    auto& arr = j[std::to_string(p)] = nlohmann::json::array();
    for (std::size_t e = 0; e < mvl_; ++e) {
      std::snprintf(buf, sizeof buf, "%016llx",
                    static_cast<unsigned long long>(storage_[p * mvl_ + e]));
      arr.push_back(buf);
    }
  }
  return j;
}

void MVrf::set_base(std::uint64_t addr, const SimMemory& mem)
{
  if (mem.overlaps(addr, region_bytes()))
    throw ConfigError("M-VRF region overlaps a kernel array");
  base_ = addr;
  storage_.assign(virtuals_ * mvl_, 0);
}

std::uint64_t MVrf::slot_address(Vvr v) const
{
  if (!base_)
    throw ConfigError("M-VRF base address not set");
  return *base_ + idx(v) * mvl_ * kWordBytes;
}

std::span<const Word> MVrf::slot(Vvr v) const
{
  if (!base_)
    throw ConfigError("M-VRF base address not set");
  return {storage_.data() + idx(v) * mvl_, mvl_};
}

std::span<Word> MVrf::slot(Vvr v)
{
  if (!base_)
    throw ConfigError("M-VRF base address not set");
  return {storage_.data() + idx(v) * mvl_, mvl_};
}

void swap_store_exec(const PVrf& pvrf, Preg from, MVrf& mvrf, Vvr v)
{
  auto src = pvrf.read_register(from, pvrf.mvl());
  auto dst = mvrf.slot(v);
  std::copy(src.begin(), src.end(), dst.begin());
}

void swap_load_exec(const MVrf& mvrf, Vvr v, PVrf& pvrf, Preg to)
{
  pvrf.write_register(to, mvrf.slot(v), pvrf.mvl());
}

} // namespace ava
