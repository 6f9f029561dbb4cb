#include <doctest.h>

#include "ava/mapping.hpp"
#include "support/walkthrough.hpp"

using namespace ava;

namespace
{

MapState with_residents(std::size_t pregs, std::initializer_list<std::pair<int, int>> vvr_phys)
{
  auto ms = MapState::initial(pregs, 128);
  for (auto [v, p] : vvr_phys) {
    ms.take(preg(p));
    ms.bind(vvr(v), preg(p));
  }
  return ms;
}

} // namespace

TEST_CASE("equal counts go to the lowest VVR id")
{
  auto ms = with_residents(8, {{9, 0}, {5, 1}});
  std::vector<int> rac(64, 0);
  rac[5] = 3;
  rac[9] = 3;
  CHECK(select_victim(ms, rac, {}) == vvr(5));
}

TEST_CASE("the smallest count outside the sources is chosen")
{
  auto ms = with_residents(8, {{39, 0}, {42, 1}, {43, 2}});
  std::vector<int> rac(64, 0);
  rac[39] = 1;
  rac[42] = 2;
  rac[43] = 2;
  std::vector<Vvr> forbidden{vvr(42), vvr(43)};
  CHECK(select_victim(ms, rac, forbidden) == vvr(39));
}

TEST_CASE("zero counts are for reclamation, not for swaps")
{
  auto ms = with_residents(8, {{3, 0}, {4, 1}});
  std::vector<int> rac(64, 0);
  rac[4] = 6;
  CHECK(select_victim(ms, rac, {}) == vvr(4));
  rac[4] = 0;
  CHECK_FALSE(select_victim(ms, rac, {}).has_value());
}

TEST_CASE("the eligibility hook filters candidates")
{
  auto ms = with_residents(8, {{3, 0}, {4, 1}});
  std::vector<int> rac(64, 0);
  rac[3] = 1;
  rac[4] = 2;
  CHECK(select_victim(ms, rac, {}, [](Vvr v) { return v != vvr(3); }) == vvr(4));
}

TEST_CASE("walkthrough: destinations, reclamation and the single swap")
{
  auto t = ava::testing::run_walkthrough();
  auto bad = ava::testing::walkthrough_mismatches(t);
  for (const auto& b : bad)
    FAIL_CHECK(b);
  CHECK(t.ms.prmt[42] == preg(6));
  CHECK(t.ms.vrlt[42]);
  CHECK(t.ms.prmt[44] == preg(7));
  CHECK(t.ms.pfrl.empty());
  t.ms.check_partition();
}

TEST_CASE("a source held in memory with no free register costs one store and one load")
{
  auto rs = RenameState::initial();
  auto ms = MapState::initial(2, 128);
  ms.take(preg(0));
  ms.bind(vvr(1), preg(0));
  ms.take(preg(1));
  ms.bind(vvr(2), preg(1));
  rs.rac[1] = 2;
  rs.rac[2] = 1;
  auto ri = *rename(ava::testing::make_instr(Opcode::VAdd, 5, {1, 3}), rs).instr;
  PreissueProgress prog;
  auto step = map_sources(ri, prog, ms, rs, 4);
  REQUIRE(step.complete);
  REQUIRE(step.swaps.size() == 2);
  CHECK(step.swaps[0].kind == SwapKind::Store);
  CHECK(step.swaps[0].vvr == vvr(2));
  CHECK(step.swaps[1].kind == SwapKind::Load);
  CHECK(step.swaps[1].vvr == vvr(3));
  CHECK(step.swaps[1].phys == step.swaps[0].phys);
  CHECK(step.swaps[1].width == 128);
  CHECK(ms.resident(vvr(1)));
  CHECK(ms.resident(vvr(3)));
  ms.check_partition();
}

TEST_CASE("swap generation respects the queue budget")
{
  auto rs = RenameState::initial();
  auto ms = MapState::initial(1, 128);
  ms.take(preg(0));
  ms.bind(vvr(2), preg(0));
  rs.rac[2] = 1;
  auto ri = *rename(ava::testing::make_instr(Opcode::VAdd, 5, {1, 1}), rs).instr;
  PreissueProgress prog;
  auto step = map_sources(ri, prog, ms, rs, 1);
  CHECK_FALSE(step.complete);
  CHECK(step.swaps.empty());
  CHECK(ms.resident(vvr(2)));
}

TEST_CASE("a victim whose memory slot is current is evicted without a store")
{
  auto rs = RenameState::initial();
  auto ms = MapState::initial(1, 64);
  ms.elide_clean_stores = true;
  ms.take(preg(0));
  ms.bind(vvr(2), preg(0));
  ms.slot_current[2] = true;
  auto ri = *rename(ava::testing::make_instr(Opcode::VLoad, 7, {}), rs).instr;
  PreissueProgress prog;
  auto step = allocate_dest(ri, prog, ms, rs, 4);
  REQUIRE(step.complete);
  CHECK(step.swaps.empty());
  CHECK(step.evicted == std::vector<Vvr>{vvr(2)});
  CHECK(ms.elided_stores == 1);
  CHECK(prog.dest_phys == preg(0));
}

TEST_CASE("reclamation waits for older memory instructions")
{
  auto rs = RenameState::initial();
  auto ms = MapState::initial(8, 128);
  ms.take(preg(3));
  ms.bind(vvr(38), preg(3));
  rs.rac[38] = 0;
  rs.valid[38] = true;
  CHECK(reclaim(ms, rs, true).empty());
  CHECK(ms.resident(vvr(38)));
  auto freed = reclaim(ms, rs, false);
  REQUIRE(freed.size() == 1);
  CHECK(freed[0] == preg(3));
  CHECK_FALSE(ms.vrlt[38]);
  CHECK(ms.pfrl.back() == preg(3));
}

TEST_CASE("architecturally mapped or unwritten VVRs are never reclaimed")
{
  auto rs = RenameState::initial();
  auto ms = MapState::initial(8, 128);
  ms.take(preg(0));
  ms.bind(vvr(4), preg(0));     // RAT[4] = 4
  rs.rac[4] = 0;
  ms.take(preg(1));
  ms.bind(vvr(40), preg(1));    // producer not yet executed
  rs.rac[40] = 0;
  rs.valid[40] = false;
  CHECK(reclaim(ms, rs, false).empty());
}

TEST_CASE("partition check catches a register that is both free and mapped")
{
  auto ms = MapState::initial(4, 64);
  ms.take(preg(1));
  ms.bind(vvr(9), preg(1));
  CHECK_NOTHROW(ms.check_partition());
  ms.pfrl.push_back(preg(1));
  CHECK_THROWS_AS(ms.check_partition(), InvariantError);
}
