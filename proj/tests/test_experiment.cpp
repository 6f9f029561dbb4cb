#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "ava/experiment.hpp"
#include "ava/presets.hpp"

using namespace ava;

namespace
{

SweepMatrix small_matrix()
{
  SweepMatrix m;
  for (const char* c : {"NATIVE-X1", "AVA-X2", "AVA-X8", "RG-LMUL4"})
    m.cells.push_back(parse_cell(c));
  for (const char* k : {"axpy", "lavamd"})
    m.kernels.emplace_back(k, load_kernel(k));
  m.params.elements = 2048;
  return m;
}

} // namespace

TEST_CASE("fourteen standard cells")
{
  const auto& cells = standard_cells();
  REQUIRE(cells.size() == 14);
  CHECK(cells.front().label == "NATIVE-X1");
  CHECK(parse_cell("AVA-X3").mvl == 48);
  CHECK(parse_cell("RG-LMUL8").lmul == 8);
  CHECK(parse_cell("RG-LMUL8").mvl == 128);
  CHECK_THROWS_AS(parse_cell("AVA-X5"), ConfigError);
}

TEST_CASE("the baseline row has speedup 1 and rows come kernel-major")
{
  auto rep = sweep(small_matrix(), 2);
  REQUIRE(rep.rows.size() == 8);
  CHECK(rep.all_ok);
  CHECK(rep.rows[0].kernel == "axpy");
  CHECK(rep.rows[0].cell.label == "NATIVE-X1");
  CHECK(rep.rows[0].speedup == doctest::Approx(1.0));
  CHECK(rep.rows[4].kernel == "lavamd");
}

TEST_CASE("sweeps are reproducible byte for byte")
{
  auto a = to_csv(sweep(small_matrix(), 1));
  auto b = to_csv(sweep(small_matrix(), 3));
  CHECK(a == b);
  CHECK(a.starts_with("kernel,config,mode,mvl,lmul,vl,iterations,elements,cycles,"));
}

TEST_CASE("the baseline is simulated even when the matrix omits it")
{
  auto m = small_matrix();
  m.cells.erase(m.cells.begin());
  auto rep = sweep(m, 1);
  CHECK(rep.rows.size() == 6);
  CHECK(rep.rows[0].speedup > 0.0);
}

TEST_CASE("speedup is per element")
{
  CellResult base, r;
  base.stats.total_cycles = 1000;
  base.elements = 100;
  r.stats.total_cycles = 1000;
  r.elements = 200;
  CHECK(speedup(base, r) == doctest::Approx(2.0));
  CHECK(speedup(base, base) == doctest::Approx(1.0));
}

TEST_CASE("conflicting parameters fail before simulation")
{
  RunParams p;
  p.vl = 64;
  CHECK_THROWS_AS(run_cell(parse_cell("AVA-X2"), "axpy", load_kernel("axpy"), p), ConfigError);
}

TEST_CASE("JSON matrix files select cells and kernels")
{
  auto path = std::filesystem::temp_directory_path() / "ava_matrix_test.json";
  std::ofstream(path) << R"({"cells": ["AVA-X4"], "kernels": ["somier"], "elements": 1024})";
  auto m = load_matrix(path.string());
  REQUIRE(m.cells.size() == 1);
  CHECK(m.cells[0].label == "AVA-X4");
  REQUIRE(m.kernels.size() == 1);
  CHECK(m.kernels[0].first == "somier");
  CHECK(m.params.elements == 1024);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_matrix("no-such-matrix"), ConfigError);
  CHECK(load_matrix("full").kernels.size() == 6);
}

TEST_CASE("JSON rows carry the stall breakdown")
{
  RunParams p;
  p.iterations = 2;
  auto j = to_json(run_cell(parse_cell("AVA-X8"), "swaptions", load_kernel("swaptions"), p));
  CHECK(j.at("stats").contains("stalls"));
  CHECK(j.at("oracle") == "pass");
}

TEST_CASE("AVA_SEED overrides the default seed")
{
  ::setenv("AVA_SEED", "99", 1);
  CHECK(seed_from_env(1) == 99);
  ::setenv("AVA_SEED", "x", 1);
  CHECK_THROWS_AS(seed_from_env(1), ConfigError);
  ::unsetenv("AVA_SEED");
  CHECK(seed_from_env(7) == 7);
}

TEST_CASE("unknown kernel names and files are kernel errors")
{
  CHECK_THROWS_AS(load_kernel("not-a-kernel"), KernelError);
}
