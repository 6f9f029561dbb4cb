#pragma once

// Single randomized cases shared by the property tests and the acceptance
// runner. Each case is fully determined by its seed.

#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "ava/experiment.hpp"
#include "ava/machine.hpp"
#include "random_kernel.hpp"

namespace ava::testing
{

struct CaseResult
{
  bool ok = true;
  std::string detail;   // reproduction info on failure
};

inline std::vector<std::uint64_t> random_flushes(std::mt19937_64& rng, std::size_t body,
                                                 std::uint64_t iterations)
{
  std::vector<std::uint64_t> f;
  if (!std::bernoulli_distribution(0.4)(rng))
    return f;
  const std::uint64_t total = body * iterations;
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 2)(rng);
  for (std::size_t i = 0; i < n; ++i)
    f.push_back(std::uniform_int_distribution<std::uint64_t>(0, total - 1)(rng));
  return f;
}

inline std::string describe(std::uint64_t seed, const std::string& cell, std::uint32_t vl,
                            std::uint64_t iters, const std::vector<std::uint64_t>& flushes,
                            const std::string& text)
{
  std::ostringstream os;
  os << "seed " << seed << ", " << cell << ", vl " << vl << ", iterations " << iters
     << ", flush_at [";
  for (std::size_t i = 0; i < flushes.size(); ++i)
    os << (i ? " " : "") << flushes[i];
  os << "]\n" << text;
  return os.str();
}

/// Random kernel on a random matrix cell, final memory against the reference.
inline CaseResult oracle_case(std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  // One case in three goes to an AVA cell small enough to swap.
  std::vector<ConfigCell> cells = standard_cells();
  if (std::bernoulli_distribution(1.0 / 3.0)(rng))
    std::erase_if(cells, [](const ConfigCell& c) { return c.mode != Mode::Ava || c.mvl < 64; });
  const ConfigCell cell =
    cells[std::uniform_int_distribution<std::size_t>(0, cells.size() - 1)(rng)];
  const std::uint32_t vl = std::bernoulli_distribution(0.6)(rng)
                             ? cell.mvl
                             : std::uniform_int_distribution<std::uint32_t>(1, cell.mvl)(rng);
  KernelShape shape;
  shape.vl = vl;
  const std::string text = random_kernel_text(rng, shape);
  const std::uint64_t iters = std::uniform_int_distribution<std::uint64_t>(1, 6)(rng);

  RunParams p;
  p.iterations = iters;
  p.vl = vl;
  p.seed = seed;
  p.check_invariants = true;
  CaseResult res;
  try {
    Kernel k = parse_kernel(text);
    p.flush_at = random_flushes(rng, k.body.size(), iters);
    auto r = run_cell(cell, "random", k, p);
    if (!r.oracle_ok) {
      res.ok = false;
      res.detail = r.oracle_report;
    }
  } catch (const std::exception& e) {
    res.ok = false;
    res.detail = e.what();
  }
  if (!res.ok)
    res.detail = describe(seed, cell.label, vl, iters, p.flush_at, text) + res.detail;
  return res;
}

/// Random kernel on AVA at `mvl`: must finish (the watchdog throws on a
/// stall), keep every invariant, and never evict a source of the
/// instruction being mapped.
inline CaseResult progress_case(std::uint64_t seed, std::uint32_t mvl)
{
  std::mt19937_64 rng(seed);
  KernelShape shape;
  shape.vl = mvl;
  const std::string text = random_kernel_text(rng, shape);
  const std::uint64_t iters = std::uniform_int_distribution<std::uint64_t>(1, 6)(rng);
  std::vector<std::uint64_t> flushes;

  CaseResult res;
  try {
    Kernel k = parse_kernel(text);
    flushes = random_flushes(rng, k.body.size(), iters);
    auto cfg = make_machine_config(Mode::Ava, mvl);
    cfg.check_invariants = true;
    auto stream = expand_trace(k, mvl, iters, mvl);
    Machine m(cfg, stream, seed);
    for (auto f : flushes)
      m.add_flush(f);
    std::ostringstream trace;
    m.set_event_trace(&trace);
    m.run();

    // Sources per instruction as last renamed (recovery renames again).
    std::map<std::uint64_t, std::set<std::string>> sources;
    std::istringstream in(trace.str());
    for (std::string line; std::getline(in, line);) {
      std::istringstream f(line);
      std::string cyc, stage, id, detail;
      std::getline(f, cyc, ',');
      std::getline(f, stage, ',');
      std::getline(f, id, ',');
      std::getline(f, detail);
      const auto seq = std::stoull(id);
      if (stage == "rename") {
        auto& s = sources[seq];
        s.clear();
        auto at = detail.find("s=");
        if (at != std::string::npos) {
          std::istringstream regs(detail.substr(at + 2));
          for (std::string r; regs >> r;)
            s.insert(r);
        }
      } else if (stage == "preissue" && detail.starts_with("evict ")) {
        const auto v = detail.substr(6);
        if (sources[seq].count(v)) {
          res.ok = false;
          res.detail = "instruction " + id + " evicted its own source " + v + "\n";
          break;
        }
      }
    }
  } catch (const std::exception& e) {
    res.ok = false;
    res.detail = e.what();
  }
  if (!res.ok)
    res.detail = describe(seed, "AVA mvl " + std::to_string(mvl), mvl, iters, flushes, text) +
                 res.detail;
  return res;
}

} // namespace ava::testing
