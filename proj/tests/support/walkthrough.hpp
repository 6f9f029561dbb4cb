#pragma once

// The three-instruction walkthrough at MVL 128 (8 physical registers):
//   vload v4, a        ; 4 -> 37 renamed to 42, phys 6 from the PFRL
//   vload v5, b        ; 5 -> 38 renamed to 43, 38 dies and phys 3 is reused
//   vadd  v6, v4, v5   ; 6 -> 39 renamed to 44, 39 is swapped out of phys 7
// Prior state: 37 lives in memory, 38 in phys 3 (count 1), 39 in phys 7
// (count 2), VVRs 10..14 hold phys 0,1,2,4,5 with count 3, PFRL = [6] and
// the FRL starts 42, 43, 44.

#include <algorithm>

#include "ava/isa.hpp"
#include "ava/mapping.hpp"
#include "ava/rename.hpp"
#include "ava/vrf.hpp"

namespace ava::testing
{

struct WalkthroughTrace
{
  RenameState rs;
  MapState ms;
  RenamedInstr i1, i2, i3;
  Preg i1_dest{}, i2_dest{}, i3_dest{};
  int rac38_after_i2 = -1;
  bool vrlt38_after_reclaim = true;
  std::vector<Preg> reclaimed;
  int rac39_after_i3 = -1;
  std::vector<SwapOp> i3_swaps;
  bool phys7_freed_for_i3 = false;
};

inline VecInstr make_instr(Opcode op, std::size_t d, std::vector<std::size_t> srcs)
{
  VecInstr in;
  in.op = op;
  in.dest = lreg(d);
  in.nsrc = static_cast<std::uint8_t>(srcs.size());
  for (std::size_t i = 0; i < srcs.size(); ++i)
    in.srcs[i] = lreg(srcs[i]);
  return in;
}

inline WalkthroughTrace run_walkthrough()
{
  WalkthroughTrace t;
  const auto cfg = configure(128, Mode::Ava);
  t.rs = RenameState::initial();
  t.ms = MapState::initial(cfg.pregs, cfg.mvl);

  // Logical 4, 5, 6 map to 37, 38, 39; their old VVRs 4, 5, 6 go free.
  t.rs.frl.clear();
  for (std::size_t v = 32; v < 64; ++v)
    if (v != 37 && v != 38 && v != 39)
      t.rs.frl.push_back(vvr(v));
  std::rotate(t.rs.frl.begin(),
              std::find(t.rs.frl.begin(), t.rs.frl.end(), vvr(42)), t.rs.frl.end());
  for (std::size_t l : {4u, 5u, 6u}) {
    t.rs.rac[l] = 0;
    t.rs.valid[l] = false;
    t.rs.frl.push_back(vvr(l));
  }
  t.rs.rat[4] = vvr(37);
  t.rs.rat[5] = vvr(38);
  t.rs.rat[6] = vvr(39);
  t.rs.rac[37] = 1;
  t.rs.rac[38] = 1;
  t.rs.rac[39] = 2;
  for (std::size_t v : {37u, 38u, 39u})
    t.rs.valid[v] = true;

  auto seat = [&](std::size_t v, std::size_t p) {
    t.ms.take(preg(p));
    t.ms.bind(vvr(v), preg(p));
  };
  seat(38, 3);
  seat(39, 7);
  const std::size_t older[] = {10, 11, 12, 13, 14};
  const std::size_t older_phys[] = {0, 1, 2, 4, 5};
  for (std::size_t i = 0; i < 5; ++i) {
    seat(older[i], older_phys[i]);
    t.rs.rac[older[i]] = 3;
  }

  PreissueProgress prog;
  t.i1 = *rename(make_instr(Opcode::VLoad, 4, {}), t.rs).instr;
  allocate_dest(t.i1, prog, t.ms, t.rs, 4);
  t.i1_dest = *prog.dest_phys;
  t.rs.valid[idx(*t.i1.dest_vvr)] = true;

  prog = {};
  t.i2 = *rename(make_instr(Opcode::VLoad, 5, {}), t.rs).instr;
  t.rac38_after_i2 = t.rs.rac[38];
  t.reclaimed = reclaim(t.ms, t.rs, false);
  t.vrlt38_after_reclaim = t.ms.vrlt[38];
  allocate_dest(t.i2, prog, t.ms, t.rs, 4);
  t.i2_dest = *prog.dest_phys;
  t.rs.valid[idx(*t.i2.dest_vvr)] = true;

  prog = {};
  t.i3 = *rename(make_instr(Opcode::VAdd, 6, {4, 5}), t.rs).instr;
  t.rac39_after_i3 = t.rs.rac[39];
  auto src = map_sources(t.i3, prog, t.ms, t.rs, 4);
  auto dst = allocate_dest(t.i3, prog, t.ms, t.rs, 4);
  t.i3_swaps = src.swaps;
  t.i3_swaps.insert(t.i3_swaps.end(), dst.swaps.begin(), dst.swaps.end());
  t.i3_dest = *prog.dest_phys;
  t.phys7_freed_for_i3 = !t.ms.vrlt[39] && t.i3_dest == preg(7);
  return t;
}

/// Exact expectations of the walkthrough; empty when all hold.
inline std::vector<std::string> walkthrough_mismatches(const WalkthroughTrace& t)
{
  std::vector<std::string> bad;
  auto expect = [&](bool ok, const char* what) {
    if (!ok)
      bad.emplace_back(what);
  };
  expect(t.i1.old_dest_vvr == vvr(37) && t.i1.dest_vvr == vvr(42), "instr 1 renames 37 -> 42");
  expect(t.i2.old_dest_vvr == vvr(38) && t.i2.dest_vvr == vvr(43), "instr 2 renames 38 -> 43");
  expect(t.i3.dest_vvr == vvr(44) && t.i3.old_dest_vvr == vvr(39) &&
           t.i3.src_vvrs[0] == vvr(42) && t.i3.src_vvrs[1] == vvr(43),
         "instr 3 reads 42, 43 and renames 39 -> 44");
  expect(t.i1_dest == preg(6), "instr 1 gets phys 6");
  expect(t.rac38_after_i2 == 0, "rac[38] reaches 0");
  expect(t.reclaimed.size() == 1 && t.reclaimed[0] == preg(3) && !t.vrlt38_after_reclaim,
         "phys 3 reclaimed from 38, vrlt[38] = 0");
  expect(t.i2_dest == preg(3), "instr 2 gets phys 3");
  expect(t.rac39_after_i3 == 1, "rac[39] reaches 1");
  expect(t.i3_swaps.size() == 1 && t.i3_swaps[0].kind == SwapKind::Store &&
           t.i3_swaps[0].vvr == vvr(39) && t.i3_swaps[0].phys == preg(7) &&
           t.i3_swaps[0].width == 128,
         "one 128-wide swap-store of 39 from phys 7");
  expect(t.phys7_freed_for_i3, "phys 7 freed and assigned to 44");
  return bad;
}

} // namespace ava::testing
