#include "edchrom/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace edchrom {

Field restrict_reference(const Field& reference, std::size_t cells) {
  const std::size_t m_ref = reference.cells();
  if (cells == 0 || m_ref % cells != 0)
    throw std::invalid_argument("restrict_reference: target grid must divide the reference grid");
  const std::size_t ratio = m_ref / cells;
  const std::size_t n = reference.components();
  Field out(n, cells);
  for (std::size_t j = 0; j < cells; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t k = 0; k < ratio; ++k) sum += reference(i, ratio * j + k);
      out(i, j) = sum / static_cast<double>(ratio);
    }
  }
  return out;
}

double l1_error(const Field& solution, const Field& reference_restricted) {
  require_same_shape(solution, reference_restricted, "l1_error");
  double sum = 0.0;
  const auto a = solution.data();
  const auto b = reference_restricted.data();
  for (std::size_t k = 0; k < a.size(); ++k) sum += std::abs(b[k] - a[k]);
  return sum / static_cast<double>(solution.cells());
}

double trimmed_l1_error(const Field& solution, const Field& reference_restricted,
                        double trim_fraction) {
  require_same_shape(solution, reference_restricted, "trimmed_l1_error");
  if (!(trim_fraction >= 0.0 && trim_fraction < 1.0))
    throw std::invalid_argument("trimmed_l1_error: trim fraction must lie in [0, 1)");
  const auto a = solution.data();
  const auto b = reference_restricted.data();
  std::vector<double> diff(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) diff[k] = std::abs(b[k] - a[k]);
  std::sort(diff.begin(), diff.end());
  const auto drop = static_cast<std::size_t>(std::ceil(trim_fraction * static_cast<double>(diff.size())));
  double sum = 0.0;
  for (std::size_t k = 0; k + drop < diff.size(); ++k) sum += diff[k];
  return sum / static_cast<double>(solution.cells());
}

double convergence_order(double e_m, double e_2m) {
  if (!(e_m > 0.0) || !(e_2m > 0.0))
    throw std::invalid_argument("convergence_order: errors must be positive");
  return std::log2(e_m / e_2m);
}

Preset experiment_preset(int id) {
  Preset p;
  p.id = id;
  SimulationConfig& cfg = p.config;
  cfg.u = 0.2;
  cfg.cfl = 0.8;
  switch (id) {
    case 1:
    case 2:
    case 3: {
      const double displacer = id == 1 ? 1.0 : id == 2 ? 0.5 : 0.1;
      p.isotherm = {{4.0, 5.0, 6.0}, {4.0, 5.0, 1.0}, 0.5, 1.0};
      cfg.scheme = SchemeKind::ChrUpw;
      cfg.dispersion = 0.0;
      cfg.cells = 800;
      cfg.final_time = 11.0;
      cfg.output_times = {1.0, 4.0, 8.0, 11.0};
      cfg.injection = InjectionSchedule(3);
      cfg.injection.add(0.0, 0.1, {1.0, 1.0, 0.0});
      cfg.injection.add(0.1, std::numeric_limits<double>::infinity(), {0.0, 0.0, displacer});
      cfg.initial = InitialProfile{};
      p.reference_scheme = SchemeKind::ChrUpw;
      break;
    }
    case 4: {
      p.isotherm = {{4.0, 5.0, 6.0}, {1.0, 1.0, 1.0}, 0.5, 1.0};
      cfg.scheme = SchemeKind::CompUpw5;
      cfg.dispersion = 1e-4;
      cfg.cells = 100;
      cfg.final_time = 0.5;
      cfg.output_times = {0.5};
      cfg.injection = InjectionSchedule();
      cfg.initial.kind = InitialProfile::Kind::Gaussian;
      cfg.initial.amplitude = {1.0, 2.0, 3.0};
      cfg.initial.center = 0.5;
      cfg.initial.sharpness = 100.0;
      cfg.initial.sampling = InitialProfile::Sampling::Point;
      p.reference_scheme = SchemeKind::CompUpw5;
      break;
    }
    default:
      throw std::invalid_argument("unknown experiment id " + std::to_string(id) + " (expected 1-4)");
  }
  p.reference_cells = 25600;
  return p;
}

RunResult run_preset(const Preset& preset) {
  const IsothermModel model(preset.isotherm);
  return run(preset.config, model);
}

void assign_orders(std::vector<ErrorReport>& reports) {
  for (ErrorReport& r : reports) {
    r.order.reset();
    if (!r.failure.empty() || !(r.error > 0.0)) continue;
    for (const ErrorReport& s : reports) {
      if (s.scheme == r.scheme && s.nu == r.nu && s.dispersion == r.dispersion && s.time == r.time &&
          s.cells == 2 * r.cells && s.failure.empty() && s.error > 0.0) {
        r.order = convergence_order(r.error, s.error);
      }
    }
  }
}

namespace {

template <typename Task>
void run_tasks(std::size_t count, int jobs, Task&& task) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(jobs > 0 ? jobs : 1, count));
  if (workers == 1) {
    for (std::size_t k = 0; k < count; ++k) task(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) task(k);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

std::vector<ErrorReport> efficiency_sweep(const std::vector<SchemeKind>& schemes,
                                          const std::vector<std::size_t>& cells,
                                          const Preset& preset, const std::vector<double>& outputs,
                                          const RunResult& reference, int jobs) {
  if (reference.snapshots.size() != outputs.size())
    throw std::invalid_argument("efficiency_sweep: reference snapshots do not match output times");
  const IsothermModel model(preset.isotherm);

  struct Entry {
    SchemeKind scheme;
    std::size_t cells;
  };
  std::vector<Entry> entries;
  for (SchemeKind s : schemes) {
    for (std::size_t m : cells) entries.push_back({s, m});
  }

  std::vector<std::vector<ErrorReport>> results(entries.size());
  run_tasks(entries.size(), jobs, [&](std::size_t k) {
    const Entry& e = entries[k];
    SimulationConfig cfg = preset.config;
    cfg.scheme = e.scheme;
    cfg.cells = e.cells;
    cfg.output_times = outputs;
    std::vector<ErrorReport> rows;
    ErrorReport base;
    base.scheme = e.scheme;
    base.nu = preset.isotherm.nu;
    base.dispersion = cfg.dispersion;
    base.cells = e.cells;
    try {
      const RunResult r = run(cfg, model);
      for (std::size_t o = 0; o < outputs.size(); ++o) {
        ErrorReport row = base;
        row.time = outputs[o];
        row.wall_seconds = r.wall_seconds;
        const Field ref = restrict_reference(reference.snapshots[o].w, e.cells);
        row.error = l1_error(r.snapshots[o].w, ref);
        row.error_trimmed = trimmed_l1_error(r.snapshots[o].w, ref);
        rows.push_back(row);
      }
    } catch (const std::exception& ex) {
      for (double t : outputs) {
        ErrorReport row = base;
        row.time = t;
        row.failure = ex.what();
        rows.push_back(row);
      }
    }
    results[k] = std::move(rows);
  });

  std::vector<ErrorReport> all;
  for (auto& rows : results) all.insert(all.end(), rows.begin(), rows.end());
  assign_orders(all);
  return all;
}

std::vector<ErrorReport> efficiency_sweep(const std::vector<SchemeKind>& schemes,
                                          const std::vector<std::size_t>& cells,
                                          const Preset& preset, const std::vector<double>& outputs,
                                          int jobs) {
  SimulationConfig ref_cfg = preset.config;
  ref_cfg.scheme = preset.reference_scheme;
  ref_cfg.cells = preset.reference_cells;
  ref_cfg.output_times = outputs;
  const IsothermModel model(preset.isotherm);
  const RunResult reference = run(ref_cfg, model);
  return efficiency_sweep(schemes, cells, preset, outputs, reference, jobs);
}

std::vector<ErrorReport> table1_study(const Preset& base, const std::vector<std::size_t>& cells,
                                      int jobs) {
  const std::vector<SchemeKind> schemes = {SchemeKind::ChrUpw, SchemeKind::CompUpw5,
                                           SchemeKind::CompGlf};
  std::vector<ErrorReport> all;
  for (double dispersion : {1e-4, 1e-5}) {
    for (double nu : {0.95, 1.0}) {
      Preset p = base;
      p.isotherm.nu = nu;
      p.config.dispersion = dispersion;
      auto rows = efficiency_sweep(schemes, cells, p, {p.config.final_time}, jobs);
      all.insert(all.end(), rows.begin(), rows.end());
    }
  }
  assign_orders(all);
  return all;
}

}  // namespace edchrom
