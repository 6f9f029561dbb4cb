#include "ava/rg.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>

namespace ava
{

LmulConfig lmul_config(std::uint32_t lmul)
{
  if (lmul != 1 && lmul != 2 && lmul != 4 && lmul != 8)
    throw ConfigError("LMUL must be 1, 2, 4 or 8");
  LmulConfig c;
  c.lmul = lmul;
  c.logical_groups = kLogicalRegs / lmul;
  c.physical_groups = kVirtualRegs / lmul;
  c.initial_mapped = c.logical_groups;
  c.initial_free = c.physical_groups - c.logical_groups;
  return c;
}

namespace
{

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

bool reads(const VecInstr& in, std::size_t r)
{
  for (std::uint8_t i = 0; i < in.nsrc; ++i)
    if (idx(in.srcs[i]) == r)
      return true;
  return false;
}

bool writes(const VecInstr& in, std::size_t r) { return in.dest && idx(*in.dest) == r; }

/// Registers whose value at body entry is read (before any write in the body).
std::vector<bool> entry_live(const Kernel& k)
{
  std::vector<bool> live(kLogicalRegs, false), written(kLogicalRegs, false);
  for (const auto& in : k.body) {
    for (std::uint8_t i = 0; i < in.nsrc; ++i)
      if (!written[idx(in.srcs[i])])
        live[idx(in.srcs[i])] = true;
    if (in.dest)
      written[idx(*in.dest)] = true;
  }
  return live;
}

} // namespace

std::vector<LiveRange> liveness(const Kernel& k)
{
  const auto& body = k.body;
  const std::size_t n = body.size();
  std::vector<bool> init(kLogicalRegs, false);
  for (const auto& ri : k.inits)
    init[idx(ri.reg)] = true;
  auto live_in = entry_live(k);

  std::vector<LiveRange> out;
  for (std::size_t r = 0; r < kLogicalRegs; ++r) {
    std::size_t first_write = npos;
    for (std::size_t i = 0; i < n && first_write == npos; ++i)
      if (writes(body[i], r))
        first_write = i;
    std::size_t entry_use = npos;
    for (std::size_t i = 0; i < n && (first_write == npos || i <= first_write); ++i)
      if (reads(body[i], r))
        entry_use = i;
    if (live_in[r] && first_write == npos && !init[r])
      for (std::size_t i = 0; i < n; ++i)
        if (reads(body[i], r))
          throw KernelError("v" + std::to_string(r) + " is read but never written or initialised",
                            body[i].line);
    if (live_in[r] && first_write == npos) {
      out.push_back({lreg(r), 0, entry_use, true, false, 0});
      continue;
    }
    for (std::size_t d = first_write; d < n && d != npos;) {
      std::size_t next_def = npos;
      std::size_t last = d;
      for (std::size_t j = d + 1; j < n; ++j) {
        if (reads(body[j], r))
          last = j;
        if (writes(body[j], r)) {
          next_def = j;
          break;
        }
      }
      LiveRange lr{lreg(r), d, last, false, false, 0};
      if (next_def == npos && live_in[r]) {
        lr.wraps = true;
        lr.last_use = n - 1;
        lr.entry_use = entry_use;
      }
      out.push_back(lr);
      d = next_def;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const LiveRange& a, const LiveRange& b) {
    if (a.entry != b.entry)
      return a.entry;
    return a.def < b.def;
  });
  return out;
}

std::size_t max_pressure(const Kernel& k)
{
  auto ranges = liveness(k);
  std::size_t best = 0;
  for (std::size_t i = 0; i < k.body.size(); ++i) {
    std::size_t live = 0;
    for (const auto& r : ranges) {
      // A wrapping range holds the incoming value up to entry_use and the new
      // one from def; both occupy a register when one instruction does both.
      if (r.entry)
        live += 1;
      else
        live += (r.def <= i && i <= r.last_use) + (r.wraps && i <= r.entry_use);
    }
    best = std::max(best, live);
  }
  return best;
}

SpillCount count_spills(const Kernel& k)
{
  SpillCount c;
  for (const auto& in : k.body)
    if (in.spill)
      ++(in.op == Opcode::VLoad ? c.loads : c.stores);
  return c;
}

namespace
{

Kernel renumber(const Kernel& k, const std::vector<LogicalReg>& used)
{
  std::vector<std::size_t> to(kLogicalRegs, npos);
  for (std::size_t i = 0; i < used.size(); ++i)
    to[idx(used[i])] = i;
  Kernel out = k;
  for (auto& in : out.body) {
    for (std::uint8_t i = 0; i < in.nsrc; ++i)
      in.srcs[i] = lreg(to[idx(in.srcs[i])]);
    if (in.dest)
      in.dest = lreg(to[idx(*in.dest)]);
  }
  out.inits.clear();
  for (const auto& ri : k.inits)
    if (to[idx(ri.reg)] != npos)
      out.inits.push_back({lreg(to[idx(ri.reg)]), ri.value});
  return out;
}

class SpillLowering
{
public:
  SpillLowering(const Kernel& k, std::size_t regs)
    : k_(k), n_(k.body.size()), regs_(regs), live_in_(entry_live(k)), holder_(regs),
      slot_of_(kLogicalRegs), reg_of_(kLogicalRegs), dirty_(kLogicalRegs, false)
  {
    out_ = k;
    out_.body.clear();
    out_.inits.clear();
    for (const auto& ri : k.inits)
      init_[idx(ri.reg)] = ri.value;
    for (std::size_t r = 0; r < kLogicalRegs; ++r)
      if (live_in_[r])
        slot_array(r);
  }

  Kernel run()
  {
    for (std::size_t i = 0; i < n_; ++i)
      lower(i);
    for (std::size_t r = 0; r < kLogicalRegs; ++r)
      if (live_in_[r] && reg_of_[r] && dirty_[r])
        emit_spill(Opcode::VStore, r, *reg_of_[r], k_.body.empty() ? 0 : k_.body.back().line);
    return out_;
  }

private:
  /// Index of the next read of r's current value after position i; npos if
  /// the value dies inside the body; n_ + first read if it is carried out.
  std::size_t next_use(std::size_t r, std::size_t i) const
  {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (reads(k_.body[j], r))
        return j;
      if (writes(k_.body[j], r))
        return npos;
    }
    if (!live_in_[r])
      return npos;
    for (std::size_t j = 0; j < n_; ++j)
      if (reads(k_.body[j], r))
        return n_ + j;
    return npos;
  }

  std::size_t slot_array(std::size_t r)
  {
    if (!slot_of_[r]) {
      ArrayDecl a;
      a.name = "spill_v" + std::to_string(r);
      while (out_.find_array(a.name))
        a.name += "_";
      a.size_kind = SizeKind::Mvl;
      a.size = 1;
      auto it = init_.find(r);
      a.fill = it != init_.end() ? it->second : Word{0};
      a.spill_slot = true;
      slot_of_[r] = out_.arrays.size();
      out_.arrays.push_back(a);
    }
    return *slot_of_[r];
  }

  void emit_spill(Opcode op, std::size_t r, std::size_t reg, int line)
  {
    VecInstr in;
    in.op = op;
    in.spill = true;
    in.line = line;
    in.mem.array = static_cast<std::uint16_t>(slot_array(r));
    if (op == Opcode::VLoad) {
      in.dest = lreg(reg);
    } else {
      in.nsrc = 1;
      in.srcs[0] = lreg(reg);
    }
    out_.body.push_back(in);
  }

  void release(std::size_t r)
  {
    holder_[*reg_of_[r]].reset();
    reg_of_[r].reset();
    dirty_[r] = false;
  }

  std::size_t take_register(std::size_t i, const std::vector<std::size_t>& keep, int line)
  {
    for (std::size_t g = 0; g < regs_; ++g)
      if (!holder_[g])
        return g;
    std::optional<std::size_t> best;
    std::size_t best_dist = 0;
    for (std::size_t g = 0; g < regs_; ++g) {
      std::size_t r = *holder_[g];
      if (std::find(keep.begin(), keep.end(), r) != keep.end())
        continue;
      std::size_t d = next_use(r, i);
      if (!best || d > best_dist) {
        best = g;
        best_dist = d;
      }
    }
    check_invariant(best.has_value(), "spill lowering: every register is pinned");
    std::size_t r = *holder_[*best];
    if (best_dist != npos && dirty_[r])
      emit_spill(Opcode::VStore, r, *best, line);
    release(r);
    return *best;
  }

  void lower(std::size_t i)
  {
    VecInstr in = k_.body[i];
    std::vector<std::size_t> srcs;
    for (std::uint8_t s = 0; s < in.nsrc; ++s)
      if (std::find(srcs.begin(), srcs.end(), idx(in.srcs[s])) == srcs.end())
        srcs.push_back(idx(in.srcs[s]));
    for (auto r : srcs) {
      if (reg_of_[r])
        continue;
      check_invariant(slot_of_[r].has_value(), "spill lowering: reload of a value never stored");
      std::size_t g = take_register(i, srcs, in.line);
      emit_spill(Opcode::VLoad, r, g, in.line);
      holder_[g] = r;
      reg_of_[r] = g;
    }
    for (std::uint8_t s = 0; s < in.nsrc; ++s)
      in.srcs[s] = lreg(*reg_of_[idx(in.srcs[s])]);
    for (auto r : srcs)
      if (next_use(r, i) == npos || (in.dest && idx(*in.dest) == r))
        release(r);
    if (in.dest) {
      std::size_t d = idx(*in.dest);
      std::size_t g;
      if (reg_of_[d]) {
        g = *reg_of_[d];
      } else {
        g = take_register(i, srcs, in.line);
        holder_[g] = d;
        reg_of_[d] = g;
      }
      dirty_[d] = true;
      in.dest = lreg(g);
      out_.body.push_back(in);
      if (next_use(d, i) == npos)
        release(d);
    } else {
      out_.body.push_back(in);
    }
  }

  const Kernel& k_;
  std::size_t n_;
  std::size_t regs_;
  std::vector<bool> live_in_;
  std::vector<std::optional<std::size_t>> holder_;
  std::vector<std::optional<std::size_t>> slot_of_;
  std::vector<std::optional<std::size_t>> reg_of_;
  std::vector<bool> dirty_;
  std::map<std::size_t, Word> init_;
  Kernel out_;
};

} // namespace

Kernel lower_with_lmul(const Kernel& k, std::uint32_t lmul)
{
  const auto cfg = lmul_config(lmul);
  liveness(k);
  auto used = registers_used(k);
  if (used.size() <= cfg.logical_groups)
    return renumber(k, used);
  return SpillLowering(k, cfg.logical_groups).run();
}

} // namespace ava
