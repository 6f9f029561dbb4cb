// ava-sim: run one kernel on one configuration, or sweep a matrix.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ava/experiment.hpp"
#include "ava/presets.hpp"
#include "ava/rg.hpp"

namespace fs = std::filesystem;

namespace
{

int cmd_run(const std::string& kernel_arg, const std::string& mode_arg, std::uint32_t mvl,
            std::uint32_t lmul, std::uint64_t iters, std::optional<std::uint32_t> vl,
            const std::vector<std::uint64_t>& flush_at, const std::string& json_path,
            const std::string& trace_path, const std::string& lowered_path, bool check)
{
  auto kernel = ava::load_kernel(kernel_arg);
  ava::ConfigCell cell;
  cell.mode = ava::parse_mode(mode_arg);
  cell.mvl = mvl;
  cell.lmul = cell.mode == ava::Mode::Rg ? lmul : 1;
  cell.label = std::string(ava::mode_name(cell.mode)) + "-mvl" + std::to_string(mvl);

  if (!lowered_path.empty()) {
    std::ofstream out(lowered_path);
    out << ava::format_kernel(cell.mode == ava::Mode::Rg ? ava::lower_with_lmul(kernel, lmul)
                                                         : kernel);
  }

  ava::RunParams p;
  p.iterations = iters;
  p.vl = vl;
  p.flush_at = flush_at;
  p.seed = ava::seed_from_env();
  p.check_invariants = check;

  ava::CellResult r;
  if (!trace_path.empty()) {
    // Re-run with an event trace attached; the cell result is identical.
    auto mcfg = ava::make_machine_config(cell.mode, cell.mvl, cell.lmul);
    auto lowered = cell.mode == ava::Mode::Rg ? ava::lower_with_lmul(kernel, lmul) : kernel;
    auto stream = ava::expand_trace(lowered, kernel.effective_vl(vl.value_or(mvl)), iters, mvl);
    ava::Machine m(mcfg, stream, p.seed);
    for (auto k : flush_at)
      m.add_flush(k);
    std::ofstream tr(trace_path);
    tr << "cycle,stage,instr,detail\n";
    m.set_event_trace(&tr);
    m.run();
  }
  r = ava::run_cell(cell, kernel.name, kernel, p);

  auto j = ava::to_json(r);
  if (!json_path.empty() && json_path != "-") {
    std::ofstream out(json_path);
    out << j.dump(2) << '\n';
  } else {
    std::cout << j.dump(2) << '\n';
  }
  if (!r.oracle_ok) {
    std::cerr << "oracle mismatch:\n" << r.oracle_report;
    return 3;
  }
  return 0;
}

int cmd_sweep(const std::string& matrix, const std::string& out_dir, unsigned jobs, bool check)
{
  auto m = ava::load_matrix(matrix);
  m.params.seed = ava::seed_from_env();
  m.params.check_invariants = m.params.check_invariants || check;
  auto t0 = std::chrono::steady_clock::now();
  auto rep = ava::sweep(m, jobs);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(out_dir);
  std::ofstream(fs::path(out_dir) / "sweep.csv") << ava::to_csv(rep);
  std::ofstream(fs::path(out_dir) / "sweep.json") << ava::to_json(rep).dump(2) << '\n';
  std::cerr << rep.rows.size() << " cells in " << secs << " s, results in " << out_dir << '\n';
  if (!rep.all_ok) {
    for (const auto& r : rep.rows)
      if (!r.oracle_ok)
        std::cerr << "oracle mismatch: " << r.kernel << " " << r.cell.label << "\n"
                  << r.oracle_report;
    return 3;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"AVA vector register file simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "simulate one kernel on one configuration");
  std::string kernel, mode = "ava", json, trace, lowered;
  std::uint32_t mvl = 16, lmul = 1;
  std::uint64_t iters = 1;
  std::optional<std::uint32_t> vl;
  std::vector<std::uint64_t> flush_at;
  bool check = false;
  run->add_option("--kernel", kernel, "kernel file or preset name")->required();
  run->add_option("--mode", mode, "ava, native or rg")
    ->check(CLI::IsMember({"ava", "native", "rg"}));
  run->add_option("--mvl", mvl, "maximum vector length (multiple of 16, 16..128)");
  run->add_option("--lmul", lmul, "register grouping factor for --mode rg")
    ->check(CLI::IsMember({1, 2, 4, 8}));
  run->add_option("--iters", iters, "loop iterations")->check(CLI::PositiveNumber);
  run->add_option("--vl", vl, "vector length (default: MVL)");
  run->add_option("--flush-at", flush_at, "flush after dynamic instruction k commits");
  run->add_option("--json", json, "write statistics here ('-' for stdout)");
  run->add_option("--trace", trace, "write the per-cycle event trace (CSV)");
  run->add_option("--dump-lowered", lowered, "write the kernel after LMUL lowering");
  run->add_flag("--check", check, "assert microarchitectural invariants every cycle");

  auto* sw = app.add_subcommand("sweep", "run a configuration x kernel matrix");
  std::string matrix = "full", out = "results";
  unsigned jobs = 0;
  bool sweep_check = false;
  sw->add_option("--matrix", matrix, "'full' or a JSON matrix file");
  sw->add_option("--out", out, "output directory");
  sw->add_option("--jobs", jobs, "worker threads (0 = all cores)");
  sw->add_flag("--check", sweep_check, "assert invariants every cycle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version exit 0; any malformed command line is a usage error.
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      if (mode == "rg" && mvl != 16 * lmul && app.get_subcommand("run")->count("--mvl") == 0)
        mvl = 16 * lmul;
      return cmd_run(kernel, mode, mvl, lmul, iters, vl, flush_at, json, trace, lowered, check);
    }
    return cmd_sweep(matrix, out, jobs, sweep_check);
  } catch (const ava::KernelError& e) {
    std::cerr << "kernel error: " << e.what() << '\n';
  } catch (const ava::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
  } catch (const ava::SimFault& e) {
    std::cerr << "simulation fault: " << e.what() << '\n';
  } catch (const ava::InvariantError& e) {
    std::cerr << "internal invariant violated: " << e.what() << '\n';
  }
  return 2;
}
