#include "ava/experiment.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "ava/presets.hpp"
#include "ava/reference.hpp"
#include "ava/rg.hpp"

namespace ava
{

const std::vector<ConfigCell>& standard_cells()
{
  static const std::vector<ConfigCell> cells = [] {
    std::vector<ConfigCell> c;
    for (auto mode : {Mode::Native, Mode::Ava})
      for (std::uint32_t x : {1u, 2u, 3u, 4u, 8u})
        c.push_back({std::string(mode == Mode::Native ? "NATIVE" : "AVA") + "-X" +
                       std::to_string(x),
                     mode, 16 * x, 1});
    for (std::uint32_t l : {1u, 2u, 4u, 8u})
      c.push_back({"RG-LMUL" + std::to_string(l), Mode::Rg, 16 * l, l});
    return c;
  }();
  return cells;
}

ConfigCell parse_cell(const std::string& label)
{
  for (const auto& c : standard_cells())
    if (c.label == label)
      return c;
  if (label == "RG-X3" || label == "RG-LMUL3")
    throw ConfigError("register grouping has no X3 equivalent");
  throw ConfigError("unknown configuration '" + label + "'");
}

std::uint64_t seed_from_env(std::uint64_t fallback)
{
  const char* s = std::getenv("AVA_SEED");
  if (!s || !*s)
    return fallback;
  char* end = nullptr;
  auto v = std::strtoull(s, &end, 0);
  if (*end != '\0')
    throw ConfigError(std::string("AVA_SEED is not an integer: ") + s);
  return v;
}

std::string compare_with_reference(const SimMemory& mem, const Kernel& kernel, std::uint32_t vl,
                                   std::uint64_t iterations, std::uint32_t mvl, std::uint64_t seed)
{
  auto ref = reference_execute(kernel, vl, iterations, mvl, seed);
  std::ostringstream diff;
  for (std::size_t a = 0; a < ref.arrays.size(); ++a) {
    if (kernel.arrays[a].spill_slot)
      continue;
    auto sim = mem.array(a);
    const auto& want = ref.arrays[a];
    if (sim.size() != want.size()) {
      diff << kernel.arrays[a].name << ": size " << sim.size() << " vs " << want.size() << '\n';
      continue;
    }
    std::size_t bad = 0;
    for (std::size_t e = 0; e < want.size(); ++e) {
      if (sim[e] == want[e])
        continue;
      if (bad++ < 4)
        diff << kernel.arrays[a].name << '[' << e << "]: got " << std::hex << sim[e] << " want "
             << want[e] << std::dec << '\n';
    }
    if (bad > 4)
      diff << kernel.arrays[a].name << ": " << bad << " mismatching elements\n";
  }
  return diff.str();
}

CellResult run_cell(const ConfigCell& cell, const std::string& kernel_name, const Kernel& kernel,
                    const RunParams& params)
{
  auto mcfg = make_machine_config(cell.mode, cell.mvl, cell.lmul);
  mcfg.check_invariants = params.check_invariants;
  const Kernel lowered = cell.mode == Mode::Rg ? lower_with_lmul(kernel, cell.lmul) : kernel;

  const std::uint32_t vl = kernel.effective_vl(params.vl.value_or(cell.mvl));
  if (vl == 0 || vl > cell.mvl)
    throw ConfigError("vl " + std::to_string(vl) + " does not fit MVL " + std::to_string(cell.mvl));
  std::uint64_t iters = params.iterations.value_or(std::max<std::uint64_t>(1, params.elements / vl));

  auto stream = expand_trace(lowered, vl, iters, cell.mvl);
  Machine m(mcfg, stream, params.seed);
  for (auto k : params.flush_at)
    m.add_flush(k);

  CellResult r;
  r.kernel = kernel_name;
  r.cell = cell;
  r.vl = vl;
  r.iterations = iters;
  r.elements = iters * vl;
  r.stats = m.run();
  if (params.verify) {
    r.oracle_report = compare_with_reference(m.memory(), kernel, vl, iters, cell.mvl, params.seed);
    r.oracle_ok = r.oracle_report.empty();
  }
  return r;
}

double speedup(const CellResult& baseline, const CellResult& r)
{
  double base = static_cast<double>(baseline.stats.total_cycles) / baseline.elements;
  double mine = static_cast<double>(r.stats.total_cycles) / r.elements;
  return base / mine;
}

SweepMatrix load_matrix(const std::string& preset_or_file)
{
  SweepMatrix m;
  if (preset_or_file == "full") {
    m.cells = standard_cells();
    for (const auto& n : preset_names())
      m.kernels.emplace_back(n, load_kernel(n));
    return m;
  }
  std::ifstream in(preset_or_file);
  if (!in)
    throw ConfigError("'" + preset_or_file + "' is neither a matrix preset nor a readable file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("matrix file: " + std::string(e.what()));
  }
  if (j.contains("cells"))
    for (const auto& c : j.at("cells"))
      m.cells.push_back(parse_cell(c.get<std::string>()));
  else
    m.cells = standard_cells();
  if (j.contains("kernels"))
    for (const auto& k : j.at("kernels"))
      m.kernels.emplace_back(k.get<std::string>(), load_kernel(k.get<std::string>()));
  else
    for (const auto& n : preset_names())
      m.kernels.emplace_back(n, load_kernel(n));
  m.params.elements = j.value("elements", m.params.elements);
  m.params.check_invariants = j.value("check_invariants", false);
  return m;
}

SweepReport sweep(const SweepMatrix& m, unsigned jobs)
{
  struct Task
  {
    std::size_t kernel;
    ConfigCell cell;
  };
  const ConfigCell base = parse_cell("NATIVE-X1");
  std::vector<Task> tasks;
  std::vector<std::size_t> base_task(m.kernels.size());
  for (std::size_t k = 0; k < m.kernels.size(); ++k) {
    bool have_base = false;
    for (const auto& c : m.cells) {
      if (c.label == base.label) {
        base_task[k] = tasks.size();
        have_base = true;
      }
      tasks.push_back({k, c});
    }
    if (!have_base) {
      base_task[k] = tasks.size();
      tasks.push_back({k, base});
    }
  }

  std::vector<CellResult> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < tasks.size();) {
      try {
        const auto& [name, kernel] = m.kernels[tasks[i].kernel];
        results[i] = run_cell(tasks[i].cell, name, kernel, m.params);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs == 0)
    jobs = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(jobs, tasks.size()); ++t)
    pool.emplace_back(worker);
  for (auto& t : pool)
    t.join();
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);

  SweepReport rep;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    bool in_matrix = false;
    for (const auto& c : m.cells)
      in_matrix = in_matrix || c.label == tasks[i].cell.label;
    if (!in_matrix)
      continue;
    auto r = results[i];
    r.speedup = speedup(results[base_task[tasks[i].kernel]], r);
    rep.all_ok = rep.all_ok && r.oracle_ok;
    rep.rows.push_back(std::move(r));
  }
  return rep;
}

namespace
{

std::string fixed(double v, int digits)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

} // namespace

std::string to_csv(const SweepReport& r)
{
  std::ostringstream os;
  os << "kernel,config,mode,mvl,lmul,vl,iterations,elements,cycles,arith,mem,spill_load,"
        "spill_store,swap_load,swap_store,mem_pct,arith_pct,speedup,oracle\n";
  for (const auto& c : r.rows) {
    auto mix = c.stats.mix();
    os << c.kernel << ',' << c.cell.label << ',' << mode_name(c.cell.mode) << ',' << c.cell.mvl
       << ',' << c.cell.lmul << ',' << c.vl << ',' << c.iterations << ',' << c.elements << ','
       << c.stats.total_cycles << ',' << c.stats.arith << ',' << c.stats.mem << ','
       << c.stats.spill_load << ',' << c.stats.spill_store << ',' << c.stats.swap_load << ','
       << c.stats.swap_store << ',' << fixed(mix.memory_pct, 2) << ','
       << fixed(mix.arithmetic_pct, 2) << ',' << fixed(c.speedup, 4) << ','
       << (c.oracle_ok ? "pass" : "FAIL") << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const CellResult& c)
{
  return {{"kernel", c.kernel},         {"config", c.cell.label},
          {"mode", mode_name(c.cell.mode)}, {"mvl", c.cell.mvl},
          {"lmul", c.cell.lmul},        {"vl", c.vl},
          {"iterations", c.iterations}, {"elements", c.elements},
          {"stats", c.stats.to_json()}, {"speedup", c.speedup},
          {"oracle", c.oracle_ok ? "pass" : "fail"}, {"oracle_report", c.oracle_report}};
}

nlohmann::json to_json(const SweepReport& r)
{
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : r.rows)
    rows.push_back(to_json(c));
  return {{"all_oracle_checks_passed", r.all_ok}, {"rows", rows}};
}

} // namespace ava
