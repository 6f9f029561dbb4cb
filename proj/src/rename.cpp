#include "ava/rename.hpp"

#include <algorithm>
#include <string>

namespace ava
{

RenameState RenameState::initial(std::size_t logical, std::size_t virtuals, int rac_limit)
{
  if (logical == 0 || virtuals <= logical || virtuals > 256)
    throw ConfigError("rename: need 0 < logical < virtuals <= 256");
  RenameState st;
  st.logical = logical;
  st.virtuals = virtuals;
  st.rac_limit = rac_limit;
  st.rat.resize(logical);
  st.rac.assign(virtuals, 0);
  st.valid.assign(virtuals, false);
  st.rac_trusted.assign(virtuals, true);
  for (std::size_t i = 0; i < logical; ++i) {
    st.rat[i] = vvr(i);
    st.rac[i] = 1;
    st.valid[i] = true;
  }
  for (std::size_t i = logical; i < virtuals; ++i)
    st.frl.push_back(vvr(i));
  return st;
}

bool RenameState::in_frl(Vvr v) const
{
  return std::find(frl.begin(), frl.end(), v) != frl.end();
}

nlohmann::json RenameState::dump_json() const
{
  nlohmann::json j;
  auto& r = j["rat"] = nlohmann::json::array();
  for (auto v : rat)
    r.push_back(idx(v));
  auto& f = j["frl"] = nlohmann::json::array();
  for (auto v : frl)
    f.push_back(idx(v));
  j["rac"] = rac;
  auto& va = j["valid"] = nlohmann::json::array();
  for (bool b : valid)
    va.push_back(b ? 1 : 0);
  return j;
}

RenameOutcome rename(const VecInstr& instr, RenameState& st)
{
  RenameOutcome out;
  if (instr.dest && st.frl.empty()) {
    out.stall = RenameStall::FrlEmpty;
    return out;
  }

  RenamedInstr ri;
  ri.base = instr;
  for (int s = 0; s < instr.nsrc; ++s) {
    auto l = idx(instr.srcs[s]);
    if (l >= st.logical)
      throw InvariantError("rename: logical register " + std::to_string(l) + " not in RAT");
    ri.src_vvrs[s] = st.rat[l];
  }
  if (instr.dest) {
    auto l = idx(*instr.dest);
    if (l >= st.logical)
      throw InvariantError("rename: logical register " + std::to_string(l) + " not in RAT");
    ri.old_dest_vvr = st.rat[l];
  }

  // Net counter change per VVR; all updates land together.
  std::vector<std::pair<Vvr, int>> delta;
  auto add = [&](Vvr v, int d) {
    for (auto& [k, n] : delta)
      if (k == v) {
        n += d;
        return;
      }
    delta.emplace_back(v, d);
  };
  for (int s = 0; s < instr.nsrc; ++s)
    add(ri.src_vvrs[s], +1);
  if (ri.old_dest_vvr)
    add(*ri.old_dest_vvr, -1);
  for (auto [v, d] : delta)
    if (d > 0 && st.rac_trusted[idx(v)] && st.rac[idx(v)] + d > st.rac_limit) {
      out.stall = RenameStall::RacLimit;
      return out;
    }

  if (instr.dest) {
    Vvr d = st.frl.front();
    st.frl.pop_front();
    ri.dest_vvr = d;
    st.rat[idx(*instr.dest)] = d;
    st.rac[idx(d)] = 1;
    st.valid[idx(d)] = false;
    st.rac_trusted[idx(d)] = true;
  }
  for (auto [v, d] : delta) {
    int before = st.rac[idx(v)];
    st.rac[idx(v)] += d;
    if (before != 0 && st.rac[idx(v)] == 0)
      out.reached_zero.push_back(v);
  }
  ri.seq = st.next_rename_seq++;
  out.instr = ri;
  return out;
}

ReleaseOutcome commit_release(const RenamedInstr& ri, RenameState& st)
{
  if (ri.seq != st.next_commit_seq)
    throw InvariantError("commit out of program order: got " + std::to_string(ri.seq) +
                         ", expected " + std::to_string(st.next_commit_seq));
  ++st.next_commit_seq;

  ReleaseOutcome out;
  for (int s = 0; s < ri.base.nsrc; ++s) {
    auto v = ri.src_vvrs[s];
    int before = st.rac[idx(v)];
    st.rac[idx(v)] -= 1;
    if (before != 0 && st.rac[idx(v)] == 0)
      out.reached_zero.push_back(v);
  }
  if (ri.old_dest_vvr) {
    Vvr old = *ri.old_dest_vvr;
    st.rac[idx(old)] = 0;
    st.rac_trusted[idx(old)] = true;
    st.frl.push_back(old);
    out.freed = old;
    std::erase(out.reached_zero, old);
  }
  return out;
}

} // namespace ava
