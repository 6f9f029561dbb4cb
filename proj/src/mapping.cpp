#include "ava/mapping.hpp"

#include <algorithm>
#include <string>

namespace ava
{

MapState MapState::initial(std::size_t pregs, std::uint32_t mvl, std::size_t virtuals)
{
  if (pregs == 0 || pregs > 256)
    throw ConfigError("physical register count must be in [1, 256]");
  MapState ms;
  ms.pregs = pregs;
  ms.virtuals = virtuals;
  ms.mvl = mvl;
  ms.prmt.assign(virtuals, preg(0));
  ms.vrlt.assign(virtuals, false);
  ms.slot_current.assign(virtuals, false);
  ms.owner.assign(pregs, std::nullopt);
  for (std::size_t p = 0; p < pregs; ++p)
    ms.pfrl.push_back(preg(p));
  return ms;
}

std::size_t MapState::resident_count() const
{
  return static_cast<std::size_t>(std::count(vrlt.begin(), vrlt.end(), true));
}

void MapState::bind(Vvr v, Preg p)
{
  check_invariant(!vrlt[idx(v)], "bind: VVR already resident");
  check_invariant(!owner[idx(p)], "bind: physical register already owned");
  prmt[idx(v)] = p;
  vrlt[idx(v)] = true;
  owner[idx(p)] = v;
}

Preg MapState::unbind(Vvr v)
{
  check_invariant(vrlt[idx(v)], "unbind: VVR not resident");
  Preg p = prmt[idx(v)];
  vrlt[idx(v)] = false;
  owner[idx(p)].reset();
  return p;
}

void MapState::take(Preg p)
{
  auto it = std::find(pfrl.begin(), pfrl.end(), p);
  check_invariant(it != pfrl.end(), "take: register not free");
  pfrl.erase(it);
}

void MapState::check_partition() const
{
  std::size_t res = 0;
  std::vector<bool> seen(pregs, false);
  for (std::size_t v = 0; v < virtuals; ++v) {
    if (!vrlt[v])
      continue;
    ++res;
    auto p = idx(prmt[v]);
    check_invariant(p < pregs, "PRMT entry out of range");
    check_invariant(!seen[p], "PRMT not injective over residents");
    seen[p] = true;
    check_invariant(owner[p] && idx(*owner[p]) == v, "owner table out of sync with PRMT");
  }
  for (auto p : pfrl) {
    check_invariant(!seen[idx(p)], "register both free and mapped");
    seen[idx(p)] = true;
  }
  check_invariant(res + pfrl.size() == pregs, "residents + free != pregs");
}

nlohmann::json MapState::dump_json() const
{
  nlohmann::json j;
  auto& pr = j["prmt"] = nlohmann::json::array();
  for (auto p : prmt)
    pr.push_back(idx(p));
  auto& vl = j["vrlt"] = nlohmann::json::array();
  for (bool b : vrlt)
    vl.push_back(b ? 1 : 0);
  auto& fr = j["pfrl"] = nlohmann::json::array();
  for (auto p : pfrl)
    fr.push_back(idx(p));
  j["swap_loads"] = swap_loads;
  j["swap_stores"] = swap_stores;
  return j;
}

std::optional<Vvr> select_victim(const MapState& ms, std::span<const int> rac,
                                 std::span<const Vvr> forbidden,
                                 const std::function<bool(Vvr)>& eligible)
{
  std::optional<Vvr> best;
  int best_count = 0;
  for (std::size_t i = 0; i < ms.virtuals; ++i) {
    if (!ms.vrlt[i] || rac[i] < 1)
      continue;
    Vvr v = vvr(i);
    if (std::find(forbidden.begin(), forbidden.end(), v) != forbidden.end())
      continue;
    if (eligible && !eligible(v))
      continue;
    if (!best || rac[i] < best_count) {
      best = v;
      best_count = rac[i];
    }
  }
  return best;
}

namespace
{

enum class Acquire { Got, Wait };

/// Counts as seen by victim selection: stale (untrusted) counters of a live
/// mapping are treated as at least one.
std::vector<int> victim_counts(const RenameState& rs)
{
  std::vector<int> c(rs.rac);
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!rs.rac_trusted[i])
      c[i] = std::max(c[i], 1);
  return c;
}

Acquire acquire(MapState& ms, const RenameState& rs, std::span<const Vvr> forbidden,
                const MapPolicy& policy, MapStep& step, Preg& out)
{
  if (ms.pfrl.empty()) {
    if (policy.reclaim_pending && policy.reclaim_pending())
      return Acquire::Wait;
    // A dead value whose reclamation is held back (it must survive a
    // possible rollback) is evicted before any live one.
    std::optional<Vvr> victim;
    for (std::size_t i = 0; i < ms.virtuals && !victim; ++i) {
      Vvr v = vvr(i);
      if (ms.vrlt[i] && rs.rac[i] == 0 && rs.rac_trusted[i] &&
          std::find(forbidden.begin(), forbidden.end(), v) == forbidden.end() &&
          (!policy.victim_eligible || policy.victim_eligible(v)))
        victim = v;
    }
    if (!victim)
      victim = select_victim(ms, victim_counts(rs), forbidden, policy.victim_eligible);
    if (!victim) {
      bool any = false;
      for (std::size_t i = 0; i < ms.virtuals && !any; ++i)
        any = ms.vrlt[i] &&
              std::find(forbidden.begin(), forbidden.end(), vvr(i)) == forbidden.end();
      check_invariant(any, "no eligible swap victim: every resident VVR is a source operand");
      return Acquire::Wait;
    }
    Preg p = ms.unbind(*victim);
    step.evicted.push_back(*victim);
    if (ms.elide_clean_stores && ms.slot_current[idx(*victim)]) {
      ++ms.elided_stores;
    } else {
      step.swaps.push_back({SwapKind::Store, *victim, p, ms.mvl});
      ms.slot_current[idx(*victim)] = true;
      ++ms.swap_stores;
    }
    ms.pfrl.push_back(p);
  }
  out = ms.pfrl.front();
  ms.pfrl.pop_front();
  return Acquire::Got;
}

std::span<const Vvr> sources_of(const RenamedInstr& ri)
{
  return {ri.src_vvrs, ri.base.nsrc};
}

} // namespace

MapStep map_sources(const RenamedInstr& ri, PreissueProgress& prog, MapState& ms,
                    const RenameState& rs, std::size_t swap_budget, const MapPolicy& policy)
{
  MapStep step;
  auto forbidden = sources_of(ri);
  while (prog.next_src < ri.base.nsrc) {
    Vvr v = ri.src_vvrs[prog.next_src];
    if (ms.resident(v)) {
      prog.src_phys[prog.next_src] = ms.prmt[idx(v)];
      ++prog.next_src;
      continue;
    }
    std::size_t need = ms.pfrl.empty() ? 2 : 1;
    if (swap_budget < need)
      return step;
    Preg p;
    std::size_t before = step.swaps.size();
    if (acquire(ms, rs, forbidden, policy, step, p) == Acquire::Wait)
      return step;
    swap_budget -= step.swaps.size() - before;
    ms.bind(v, p);
    step.swaps.push_back({SwapKind::Load, v, p, ms.mvl});
    ++ms.swap_loads;
    --swap_budget;
    step.allocated.push_back(p);
    prog.src_phys[prog.next_src] = p;
    ++prog.next_src;
  }
  step.complete = true;
  return step;
}

MapStep allocate_dest(const RenamedInstr& ri, PreissueProgress& prog, MapState& ms,
                      const RenameState& rs, std::size_t swap_budget, const MapPolicy& policy)
{
  MapStep step;
  if (!ri.dest_vvr || prog.dest_phys) {
    step.complete = true;
    return step;
  }
  if (ms.pfrl.empty() && swap_budget < 1)
    return step;
  Preg p;
  if (acquire(ms, rs, sources_of(ri), policy, step, p) == Acquire::Wait)
    return step;
  ms.bind(*ri.dest_vvr, p);
  prog.dest_phys = p;
  step.allocated.push_back(p);
  step.complete = true;
  return step;
}

std::vector<Preg> reclaim(MapState& ms, const RenameState& rs,
                          const std::function<bool(Vvr)>& may_reclaim)
{
  std::vector<bool> mapped(ms.virtuals, false);
  for (auto v : rs.rat)
    mapped[idx(v)] = true;
  std::vector<Preg> freed;
  for (std::size_t i = 0; i < ms.virtuals; ++i) {
    if (!ms.vrlt[i] || rs.rac[i] != 0 || !rs.rac_trusted[i] || mapped[i] || !rs.valid[i])
      continue;
    if (may_reclaim && !may_reclaim(vvr(i)))
      continue;
    Preg p = ms.unbind(vvr(i));
    ms.pfrl.push_back(p);
    freed.push_back(p);
  }
  return freed;
}

std::vector<Preg> reclaim(MapState& ms, const RenameState& rs, bool older_memory_in_flight)
{
  if (older_memory_in_flight)
    return {};
  return reclaim(ms, rs, std::function<bool(Vvr)>{});
}

} // namespace ava
