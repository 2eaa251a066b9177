#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "edchrom/field.hpp"
#include "edchrom/flux.hpp"
#include "edchrom/isotherm.hpp"
#include "edchrom/stepper.hpp"

namespace edchrom {

/// Block means of R = m_ref / m consecutive reference cells.
Field restrict_reference(const Field& reference, std::size_t cells);

/// e_m = (1/m) sum_i sum_j |ref_ij - sol_ij|.
double l1_error(const Field& solution, const Field& reference_restricted);

/// Same normalization as l1_error after dropping the ceil(trim * N * m)
/// largest per-entry differences.
double trimmed_l1_error(const Field& solution, const Field& reference_restricted,
                        double trim_fraction = 0.02);

/// log2(e_m / e_2m); both errors must be positive.
double convergence_order(double e_m, double e_2m);

struct ErrorReport {
  SchemeKind scheme = SchemeKind::ChrUpw;
  double nu = 1.0;
  double dispersion = 0.0;
  double time = 0.0;
  std::size_t cells = 0;
  double error = 0.0;
  double error_trimmed = 0.0;
  std::optional<double> order;  // against the 2m entry, when present
  double wall_seconds = 0.0;
  std::string failure;          // non-empty when the run failed
};

struct Preset {
  int id = 1;
  IsothermParams isotherm;
  SimulationConfig config;
  SchemeKind reference_scheme = SchemeKind::ChrUpw;
  std::size_t reference_cells = 25600;
};

/// Experiments 1-4. Throws std::invalid_argument for an unknown id.
Preset experiment_preset(int id);

/// Runs config at each cell count listed and returns w snapshots (user order)
/// at the config's output times.
RunResult run_preset(const Preset& preset);

/// For every scheme and every m, runs the preset to each output time and
/// compares against the reference run (preset.reference_scheme at
/// preset.reference_cells). Failed runs are reported, not rethrown. Orders
/// are filled for pairs (m, 2m) present in the list.
std::vector<ErrorReport> efficiency_sweep(const std::vector<SchemeKind>& schemes,
                                          const std::vector<std::size_t>& cells,
                                          const Preset& preset, const std::vector<double>& outputs,
                                          int jobs = 1);

/// Same, against an already computed reference run whose snapshots match
/// outputs one to one.
std::vector<ErrorReport> efficiency_sweep(const std::vector<SchemeKind>& schemes,
                                          const std::vector<std::size_t>& cells,
                                          const Preset& preset, const std::vector<double>& outputs,
                                          const RunResult& reference, int jobs = 1);

/// Fills ErrorReport::order for entries whose (scheme, nu, D_a, time, 2m)
/// partner is present.
void assign_orders(std::vector<ErrorReport>& reports);

/// The smooth-data convergence study: CHR-UPW, COMP-UPW5 and COMP-GLF with
/// nu in {0.95, 1} and D_a in {1e-4, 1e-5}, each against its own reference
/// run. base is normally experiment_preset(4); its nu and D_a are replaced.
std::vector<ErrorReport> table1_study(const Preset& base, const std::vector<std::size_t>& cells,
                                      int jobs = 1);

}  // namespace edchrom
