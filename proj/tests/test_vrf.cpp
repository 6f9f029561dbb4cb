#include <doctest.h>

#include "ava/machine.hpp"
#include "ava/vrf.hpp"

using namespace ava;

TEST_CASE("AVA physical register counts follow the fixed 8 KB file")
{
  const std::uint32_t mvls[] = {16, 32, 48, 64, 80, 96, 112, 128};
  const std::size_t pregs[] = {64, 32, 21, 16, 12, 10, 9, 8};
  const std::size_t capacity[] = {1024, 1024, 1008, 1024, 960, 960, 1008, 1024};
  for (int i = 0; i < 8; ++i) {
    CAPTURE(mvls[i]);
    auto c = configure(mvls[i], Mode::Ava);
    CHECK(c.pregs == pregs[i]);
    CHECK(c.pregs * c.mvl == capacity[i]);
    CHECK(1024 - c.pregs * c.mvl <= 64);
  }
}

TEST_CASE("NATIVE keeps 64 registers and grows the file")
{
  for (std::uint32_t mvl : {16u, 48u, 128u}) {
    auto c = configure(mvl, Mode::Native);
    CHECK(c.pregs == 64);
    CHECK(c.pvrf_capacity == 64u * mvl);
  }
}

TEST_CASE("register grouping shrinks logical, virtual and physical counts together")
{
  for (std::uint32_t lmul : {1u, 2u, 4u, 8u}) {
    auto m = make_machine_config(Mode::Rg, 16 * lmul, lmul);
    CHECK(m.logical == 32 / lmul);
    CHECK(m.virtuals == 64 / lmul);
    CHECK(m.vrf.pregs == 64 / lmul);
  }
  CHECK_THROWS_AS(make_machine_config(Mode::Rg, 48, 3), ConfigError);
}

TEST_CASE("MVLs outside 16..128 or off the 16-element grid are rejected")
{
  CHECK_THROWS_AS(configure(0, Mode::Ava), ConfigError);
  CHECK_THROWS_AS(configure(24, Mode::Ava), ConfigError);
  CHECK_THROWS_AS(configure(144, Mode::Ava), ConfigError);
}

TEST_CASE("a 16-element access takes two cycles on eight lanes")
{
  CHECK(access_cycles(16, 8) == 2);
  CHECK(access_cycles(17, 8) == 3);
  CHECK(access_cycles(128, 8) == 16);
  CHECK(lane_of(13, 8) == 5);
}

TEST_CASE("writes shorter than the MVL zero the tail")
{
  PVrf f(configure(32, Mode::Ava));
  f.mark_free(preg(2), false);
  std::vector<Word> full(32, 7), part(32, 9);
  f.write_register(preg(2), full, 32);
  f.write_register(preg(2), part, 10);
  auto r = f.read_register(preg(2), 32);
  CHECK(r[9] == 9);
  CHECK(r[10] == 0);
  CHECK(r[31] == 0);
}

TEST_CASE("reading a free register is an invariant violation")
{
  PVrf f(configure(64, Mode::Ava));
  f.mark_free(preg(1), true);
  CHECK_THROWS_AS(f.read_register(preg(1), 8), InvariantError);
  CHECK_THROWS_AS(f.read_register(preg(16), 8), SimFault);
}

TEST_CASE("swap store and load move whole MVL-wide registers")
{
  auto cfg = configure(48, Mode::Ava);
  PVrf f(cfg);
  f.mark_free(preg(0), false);
  f.mark_free(preg(5), false);
  std::vector<Word> data(48);
  for (std::size_t i = 0; i < 48; ++i)
    data[i] = 1000 + i;
  f.write_register(preg(0), data, 48);

  ResolvedArray a{"a", 64, std::nullopt, false};
  SimMemory mem({a}, 1);
  MVrf m(64, 48);
  m.set_base(0x100000, mem);
  swap_store_exec(f, preg(0), m, vvr(40));
  swap_load_exec(m, vvr(40), f, preg(5));
  auto back = f.read_register(preg(5), 48);
  CHECK(std::vector<Word>(back.begin(), back.end()) == data);
  CHECK(m.slot_address(vvr(1)) - m.slot_address(vvr(0)) == 48 * kWordBytes);
}

TEST_CASE("the memory-backed file may not overlap kernel arrays")
{
  ResolvedArray a{"a", 4096, std::nullopt, false};
  SimMemory mem({a}, 1);
  MVrf m(64, 128);
  CHECK_THROWS_AS(m.set_base(SimMemory::kArrayBase, mem), ConfigError);
  CHECK_NOTHROW(m.set_base(mem.end_address() + 4096, mem));
}
