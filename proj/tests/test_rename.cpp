#include <doctest.h>

#include <numeric>
#include <random>

#include "ava/rename.hpp"
#include "support/walkthrough.hpp"

using namespace ava;
using ava::testing::make_instr;

TEST_CASE("initial tables map v_i to VVR i and queue 32..63")
{
  auto st = RenameState::initial();
  for (std::size_t i = 0; i < 32; ++i)
    CHECK(st.rat[i] == vvr(i));
  REQUIRE(st.frl.size() == 32);
  CHECK(st.frl.front() == vvr(32));
  CHECK(st.frl.back() == vvr(63));
  for (std::size_t v = 32; v < 64; ++v)
    CHECK(st.rac[v] == 0);
}

TEST_CASE("a load renames its destination and moves the counts")
{
  auto st = RenameState::initial();
  st.rat[4] = vvr(37);
  st.frl.erase(std::find(st.frl.begin(), st.frl.end(), vvr(37)));
  st.frl.push_back(vvr(4));
  st.rac[4] = 0;
  st.rac[37] = 1;
  while (st.frl.front() != vvr(42))
    st.frl.push_back(st.frl.front()), st.frl.pop_front();

  auto out = rename(make_instr(Opcode::VLoad, 4, {}), st);
  REQUIRE(out.instr);
  CHECK(out.instr->old_dest_vvr == vvr(37));
  CHECK(out.instr->dest_vvr == vvr(42));
  CHECK(st.rac[42] == 1);
  CHECK(st.rac[37] == 0);
  CHECK(st.rat[4] == vvr(42));
  CHECK_FALSE(st.valid[42]);
  REQUIRE(out.reached_zero.size() == 1);
  CHECK(out.reached_zero[0] == vvr(37));
}

TEST_CASE("the walkthrough add reads 42 and 43 and leaves 39 at one")
{
  auto t = ava::testing::run_walkthrough();
  CHECK(t.i3.src_vvrs[0] == vvr(42));
  CHECK(t.i3.src_vvrs[1] == vvr(43));
  CHECK(t.i3.dest_vvr == vvr(44));
  CHECK(t.rac39_after_i3 == 1);
}

TEST_CASE("a store pops nothing and only counts its source")
{
  auto st = RenameState::initial();
  VecInstr s;
  s.op = Opcode::VStore;
  s.nsrc = 1;
  s.srcs[0] = lreg(3);
  auto before = st.frl;
  auto out = rename(s, st);
  REQUIRE(out.instr);
  CHECK_FALSE(out.instr->old_dest_vvr);
  CHECK_FALSE(out.instr->dest_vvr);
  CHECK(st.frl == before);
  CHECK(st.rac[3] == 2);
}

TEST_CASE("an empty FRL stalls without touching state")
{
  auto st = RenameState::initial();
  st.frl.clear();
  auto snapshot = st.rac;
  auto out = rename(make_instr(Opcode::VLoad, 1, {}), st);
  CHECK_FALSE(out.instr);
  CHECK(out.stall == RenameStall::FrlEmpty);
  CHECK(st.rac == snapshot);
}

TEST_CASE("renaming stalls instead of exceeding the counter limit")
{
  auto st = RenameState::initial(32, 64, 3);
  auto add = make_instr(Opcode::VAdd, 1, {0, 0});
  auto first = rename(add, st);
  REQUIRE(first.instr);
  CHECK(st.rac[0] == 3);
  auto second = rename(make_instr(Opcode::VAdd, 2, {0}), st);
  CHECK_FALSE(second.instr);
  CHECK(second.stall == RenameStall::RacLimit);
  CHECK(st.rac[0] == 3);
}

TEST_CASE("commit frees the old destination with a zero count")
{
  auto t = ava::testing::run_walkthrough();
  auto& st = t.rs;
  st.next_commit_seq = t.i1.seq;
  auto r1 = commit_release(t.i1, st);
  CHECK(r1.freed == vvr(37));
  auto r2 = commit_release(t.i2, st);
  CHECK(r2.freed == vvr(38));
  CHECK(st.rac[38] == 0);
  CHECK(st.frl.back() == vvr(38));
  auto r3 = commit_release(t.i3, st);
  CHECK(r3.freed == vvr(39));
  CHECK(st.rac[39] == 0);
  CHECK(st.rac[42] == 1);
  CHECK(st.rac[43] == 1);
  std::vector<Vvr> tail(st.frl.end() - 3, st.frl.end());
  CHECK(tail == std::vector<Vvr>{vvr(37), vvr(38), vvr(39)});
}

TEST_CASE("committing out of order is an invariant violation")
{
  auto st = RenameState::initial();
  auto a = *rename(make_instr(Opcode::VLoad, 1, {}), st).instr;
  auto b = *rename(make_instr(Opcode::VLoad, 2, {}), st).instr;
  CHECK_THROWS_AS(commit_release(b, st), InvariantError);
  CHECK_NOTHROW(commit_release(a, st));
}

TEST_CASE("after a random trace commits, counts reduce to the RAT references")
{
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto st = RenameState::initial();
    std::vector<RenamedInstr> window;
    std::vector<int> uncommitted_reads(64, 0);
    for (int i = 0; i < 400; ++i) {
      VecInstr in;
      in.op = std::uniform_int_distribution<int>(0, 3)(rng) == 0 ? Opcode::VStore : Opcode::VFma;
      in.nsrc = in.op == Opcode::VStore ? 1 : 3;
      for (int s = 0; s < in.nsrc; ++s)
        in.srcs[s] = lreg(std::uniform_int_distribution<std::size_t>(0, 31)(rng));
      if (in.op != Opcode::VStore)
        in.dest = lreg(std::uniform_int_distribution<std::size_t>(0, 31)(rng));
      auto out = rename(in, st);
      if (!out.instr) {
        // Drain the oldest to make room.
        REQUIRE_FALSE(window.empty());
        commit_release(window.front(), st);
        window.erase(window.begin());
        --i;
        continue;
      }
      window.push_back(*out.instr);
      if (std::bernoulli_distribution(0.5)(rng)) {
        commit_release(window.front(), st);
        window.erase(window.begin());
      }
      // Replay oracle for the counts: one per RAT entry plus one per
      // renamed, uncommitted read.
      std::vector<int> want(64, 0);
      for (auto v : st.rat)
        ++want[idx(v)];
      for (const auto& ri : window)
        for (int s = 0; s < ri.nsrc(); ++s)
          ++want[idx(ri.src_vvrs[s])];
      REQUIRE(st.rac == want);
    }
    for (const auto& ri : window)
      commit_release(ri, st);
    CHECK(st.frl.size() == 32);
    CHECK(std::accumulate(st.rac.begin(), st.rac.end(), 0) == 32);
    for (auto v : st.frl)
      CHECK(st.rac[idx(v)] == 0);
    std::vector<Vvr> sorted(st.rat);
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  }
}
