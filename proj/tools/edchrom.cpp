// Command-line driver: single runs, efficiency sweeps and the smooth-data
// convergence table.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>

#include "edchrom/config.hpp"
#include "edchrom/harness.hpp"
#include "edchrom/output.hpp"

namespace fs = std::filesystem;
using namespace edchrom;

namespace {

int run_single(const RunRequest& req) {
  const IsothermModel model(req.isotherm);
  const RunResult result = run(req.config, model);
  const fs::path dir(req.out_dir);
  const auto files = emit_profiles(dir, result.snapshots);
  write_manifest(dir, req, result);
  std::printf("%s m=%zu steps=%zu dt=[%.4g, %.4g] solver=%.3fs mass_imbalance=%.3g\n",
              std::string(scheme_name(req.config.scheme)).c_str(), req.config.cells, result.steps,
              result.dt_min, result.dt_max, result.wall_seconds, result.mass.imbalance());
  for (const auto& f : files) std::printf("  wrote %s\n", f.string().c_str());
  return 0;
}

int run_sweep(const RunRequest& req) {
  const Preset preset = req.preset();
  const auto reports = efficiency_sweep(req.sweep_schemes, req.sweep_cells, preset,
                                        req.config.output_times, req.jobs);
  const fs::path path = fs::path(req.out_dir) / "errors.csv";
  emit_errors(path, reports);
  write_errors_csv(std::cout, reports);
  std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

int run_table1(const RunRequest& req) {
  const auto reports = table1_study(req.preset(), req.sweep_cells, req.jobs);
  const fs::path path = fs::path(req.out_dir) / "errors.csv";
  emit_errors(path, reports);
  std::cout << format_table1(reports);
  std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const auto req = parse_command_line(argc, argv);
    if (!req) return 0;
    if (req->table1) return run_table1(*req);
    if (req->sweep) return run_sweep(*req);
    return run_single(*req);
  } catch (const ConfigError& e) {
    std::cerr << "edchrom: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "edchrom: " << e.what() << "\n";
    return 1;
  }
}
