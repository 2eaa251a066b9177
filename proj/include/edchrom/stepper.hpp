#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "edchrom/field.hpp"
#include "edchrom/flux.hpp"
#include "edchrom/isotherm.hpp"

namespace edchrom {

/// Cell-centred conserved variables on z in [0, 1], internal component order.
struct GridState {
  Field w;
  double t = 0.0;

  std::size_t cells() const { return w.cells(); }
  double dz() const { return 1.0 / static_cast<double>(w.cells()); }
  double z_center(std::size_t j) const { return (static_cast<double>(j) + 0.5) * dz(); }
};

/// Neumann Laplacian on m cells, scaled by 1/dz^2. Symmetric, so row and
/// column sums both vanish.
class LaplacianOperator {
 public:
  explicit LaplacianOperator(std::size_t cells);

  std::size_t cells() const { return m_; }
  double dz() const { return 1.0 / static_cast<double>(m_); }

  /// A_{jk}
  double entry(std::size_t j, std::size_t k) const;

  /// out = c A (each component row times A), written in flux form so the
  /// per-component sum telescopes.
  void apply(const Field& c, Field& out) const;

 private:
  std::size_t m_;
  double inv_dz2_;
};

/// Initial conserved-variable profile, values in user component order.
struct InitialProfile {
  enum class Kind { Zero, Gaussian };
  enum class Sampling { CellAverage, Point };

  Kind kind = Kind::Zero;
  std::vector<double> amplitude;  // Gaussian: w_i(z) = amplitude_i exp(-sharpness (z - center)^2)
  double center = 0.5;
  double sharpness = 100.0;
  Sampling sampling = Sampling::CellAverage;

  Field evaluate(std::size_t components, std::size_t cells) const;

  friend bool operator==(const InitialProfile&, const InitialProfile&) = default;
};

struct SimulationConfig {
  SchemeKind scheme = SchemeKind::ChrUpw;
  double u = 0.2;
  double dispersion = 0.0;  // D_a
  double cfl = 0.8;         // K
  double final_time = 1.0;
  std::vector<double> output_times;
  InjectionSchedule injection;
  InitialProfile initial;
  std::size_t cells = 800;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  double weno_epsilon = 1e-6;
  double max_dt = std::numeric_limits<double>::infinity();

  /// Throws std::invalid_argument on out-of-range values.
  void validate(std::size_t components) const;

  FluxSettings flux_settings() const { return {scheme, u, u, weno_epsilon}; }

  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

GridState initial_state(const SimulationConfig& config, const IsothermModel& model);

/// L(w, t): -(F_{j+1/2} - F_{j-1/2}) / dz.
Field convective_operator(const SimulationConfig& config, const IsothermModel& model,
                          const GridState& state, double t);

/// D_a C*(w) A.
Field diffusion_operator(const SimulationConfig& config, const IsothermModel& model,
                         const GridState& state);

/// Largest step allowed by u dt / dz * max rho(C'(w)) = K. Characteristic
/// schemes evaluate the spectral radius cell by cell; component-wise schemes
/// use the bound rho <= 1. Not clipped to breakpoints.
double stable_dt(const SimulationConfig& config, const IsothermModel& model, const GridState& state);

/// Block-tridiagonal matrix with N x N column-major blocks.
/// lower(j) is block (j + 1, j), upper(j) is block (j, j + 1).
class BlockTridiagonal {
 public:
  BlockTridiagonal(std::size_t block_size, std::size_t blocks);

  std::size_t block_size() const { return n_; }
  std::size_t blocks() const { return m_; }

  std::span<double> diag(std::size_t j) { return {diag_.data() + j * n_ * n_, n_ * n_}; }
  std::span<double> lower(std::size_t j) { return {lower_.data() + j * n_ * n_, n_ * n_}; }
  std::span<double> upper(std::size_t j) { return {upper_.data() + j * n_ * n_, n_ * n_}; }
  std::span<const double> diag(std::size_t j) const { return {diag_.data() + j * n_ * n_, n_ * n_}; }
  std::span<const double> lower(std::size_t j) const { return {lower_.data() + j * n_ * n_, n_ * n_}; }
  std::span<const double> upper(std::size_t j) const { return {upper_.data() + j * n_ * n_, n_ * n_}; }

  /// y = M x
  void multiply(const Field& x, Field& y) const;

 private:
  std::size_t n_, m_;
  std::vector<double> diag_, lower_, upper_;
};

/// Block LU (Thomas) solve; throws std::runtime_error on a singular pivot block.
Field block_tridiagonal_solve(const BlockTridiagonal& system, const Field& rhs);

/// ||M x - rhs||_inf / max(||rhs||_inf, tiny)
double block_tridiagonal_residual(const BlockTridiagonal& system, const Field& x, const Field& rhs);

struct ImplicitStageResult {
  Field c;
  int iterations = 0;
  double residual = 0.0;  // inf-norm of the final residual
};

/// Solves W(c_j) - (D_a dt / 2) (c A)_j = G_j for every cell j by Newton's
/// method starting from initial_guess; with D_a = 0 the columns decouple
/// and c_j = C(G_j). Throws ConvergenceError naming the worst cell.
ImplicitStageResult implicit_stage(const SimulationConfig& config, const IsothermModel& model,
                                   const Field& G, double dt, const Field& initial_guess);

/// Same, with the initial guess C*(w) of the given state.
ImplicitStageResult implicit_stage(const SimulationConfig& config, const IsothermModel& model,
                                   const GridState& state, const Field& G, double dt);

struct StepReport {
  double t = 0.0;   // time at the start of the step
  double dt = 0.0;
  std::vector<double> inflow;   // F_{1/2} of the second stage (internal order)
  std::vector<double> outflow;  // F_{m+1/2} of the second stage
  std::vector<double> mass_before;
  std::vector<double> mass_after;
  double conservation_defect = 0.0;  // max over components, relative to the whole state
  int newton_iterations = 0;
  double min_w = 0.0;
};

/// One IMEX midpoint step of size dt; advances state.t.
StepReport imex_step(const SimulationConfig& config, const IsothermModel& model, GridState& state,
                     double dt);

/// dz * sum_j w_ij per component (compensated summation).
std::vector<double> total_mass(const Field& w, double dz);

struct Snapshot {
  double t = 0.0;
  Field w;  // user order
  Field c;  // user order
};

struct MassLedger {
  std::vector<double> initial;  // user order
  std::vector<double> final;
  std::vector<double> inflow;   // integrated boundary fluxes
  std::vector<double> outflow;
  double max_step_defect = 0.0;

  /// max_i |final - initial - (inflow - outflow)|_i over the largest of those
  /// magnitudes across all components.
  double imbalance() const;
};

struct RunResult {
  std::vector<Snapshot> snapshots;
  std::size_t steps = 0;
  double dt_min = 0.0;
  double dt_max = 0.0;
  double dt_mean = 0.0;
  double wall_seconds = 0.0;
  int newton_iterations = 0;
  std::size_t negative_steps = 0;  // steps whose result had some w < 0
  double min_w = 0.0;
  MassLedger mass;
};

using StepObserver = std::function<void(const StepReport&, const GridState&)>;

/// Integrates from the initial profile to config.final_time, landing exactly
/// on injection breakpoints and output times. Snapshots are taken at every
/// output time (in user order). Timing covers the integration loop only.
RunResult run(const SimulationConfig& config, const IsothermModel& model,
              const StepObserver& observer = {});

}  // namespace edchrom
