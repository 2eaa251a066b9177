#include "edchrom/stepper.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "edchrom/dense.hpp"
#include "edchrom/spectral.hpp"
#include "edchrom/transform.hpp"

namespace edchrom {

// ---------------------------------------------------------------------------
// Laplacian

LaplacianOperator::LaplacianOperator(std::size_t cells) : m_(cells) {
  if (cells == 0) throw std::invalid_argument("LaplacianOperator: need at least one cell");
  const double m = static_cast<double>(cells);
  inv_dz2_ = m * m;
}

double LaplacianOperator::entry(std::size_t j, std::size_t k) const {
  if (m_ == 1) return 0.0;
  if (j == k) return (j == 0 || j + 1 == m_ ? -1.0 : -2.0) * inv_dz2_;
  if (j + 1 == k || k + 1 == j) return inv_dz2_;
  return 0.0;
}

void LaplacianOperator::apply(const Field& c, Field& out) const {
  if (c.cells() != m_) throw std::invalid_argument("LaplacianOperator: wrong number of cells");
  const std::size_t n = c.components();
  if (!out.same_shape(c)) out = Field(n, m_);
  out.fill(0.0);
  // Face differences (c_{j+1} - c_j) / dz^2 leave cell j and enter cell j+1.
  for (std::size_t j = 0; j + 1 < m_; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double g = (c(i, j + 1) - c(i, j)) * inv_dz2_;
      out(i, j) += g;
      out(i, j + 1) -= g;
    }
  }
}

// ---------------------------------------------------------------------------
// Configuration

Field InitialProfile::evaluate(std::size_t components, std::size_t cells) const {
  Field w(components, cells);
  if (kind == Kind::Zero) return w;
  if (amplitude.size() != components)
    throw std::invalid_argument("initial profile: amplitude count must match components");
  const double dz = 1.0 / static_cast<double>(cells);
  const double root = std::sqrt(sharpness);
  for (std::size_t j = 0; j < cells; ++j) {
    const double zl = static_cast<double>(j) * dz;
    const double zc = zl + 0.5 * dz;
    double shape;
    if (sampling == Sampling::Point) {
      shape = std::exp(-sharpness * (zc - center) * (zc - center));
    } else {
      // Exact cell average of exp(-s (z - z0)^2).
      const double a = root * (zl - center);
      const double b = root * (zl + dz - center);
      shape = 0.5 * std::sqrt(M_PI) / root * (std::erf(b) - std::erf(a)) / dz;
    }
    for (std::size_t i = 0; i < components; ++i) w(i, j) = amplitude[i] * shape;
  }
  return w;
}

void SimulationConfig::validate(std::size_t components) const {
  auto bad = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (!(u > 0.0)) bad("u must be positive");
  if (!(dispersion >= 0.0)) bad("Da must be nonnegative");
  if (!(cfl > 0.0 && cfl <= 1.0)) bad("K must lie in (0, 1]");
  if (!(final_time >= 0.0)) bad("T must be nonnegative");
  if (cells == 0) bad("m must be positive");
  if (!(newton_tol > 0.0)) bad("newton_tol must be positive");
  if (newton_max_iter < 1) bad("newton_max_iter must be at least 1");
  if (!(weno_epsilon > 0.0)) bad("weno epsilon must be positive");
  if (!(max_dt > 0.0)) bad("max_dt must be positive");
  for (double t : output_times) {
    if (!(t >= 0.0 && t <= final_time)) bad("output times must lie in [0, T]");
  }
  if (injection.components() != 0 && injection.components() != components)
    bad("injection schedule has the wrong number of components");
  if (initial.kind == InitialProfile::Kind::Gaussian && initial.amplitude.size() != components)
    bad("initial profile has the wrong number of components");
}

GridState initial_state(const SimulationConfig& config, const IsothermModel& model) {
  const Field user = config.initial.evaluate(model.size(), config.cells);
  GridState state;
  state.w = Field(model.size(), config.cells);
  for (std::size_t j = 0; j < config.cells; ++j) model.to_internal(user.column(j), state.w.column(j));
  state.t = 0.0;
  return state;
}

// ---------------------------------------------------------------------------
// Spatial operators

namespace {

void convective_from_fluxes(const Field& fluxes, double dz, Field& out) {
  const std::size_t n = fluxes.components();
  const std::size_t m = fluxes.cells() - 1;
  if (out.components() != n || out.cells() != m) out = Field(n, m);
  const double inv_dz = 1.0 / dz;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) out(i, j) = -(fluxes(i, j + 1) - fluxes(i, j)) * inv_dz;
  }
}

}  // namespace

Field convective_operator(const SimulationConfig& config, const IsothermModel& model,
                          const GridState& state, double t) {
  Field c;
  inverse_columns(model, state.w, c);
  Field fluxes;
  interface_fluxes(config.flux_settings(), model, state.w, c,
                   inflow_concentration(model, config.injection, t), fluxes);
  Field out;
  convective_from_fluxes(fluxes, state.dz(), out);
  return out;
}

Field diffusion_operator(const SimulationConfig& config, const IsothermModel& model,
                         const GridState& state) {
  Field out(state.w.components(), state.cells());
  if (config.dispersion == 0.0) return out;
  Field c;
  inverse_columns(model, state.w, c);
  LaplacianOperator(state.cells()).apply(c, out);
  for (double& x : out.data()) x *= config.dispersion;
  return out;
}

namespace {

double stable_dt_from_concentrations(const SimulationConfig& config, const IsothermModel& model,
                                     const Field& c) {
  const double dz = 1.0 / static_cast<double>(c.cells());
  if (!is_characteristic(config.scheme)) return config.cfl * dz / config.u;
  double rho = 0.0;
  for (std::size_t j = 0; j < c.cells(); ++j) {
    rho = std::max(rho, spectral_radius_of_inverse_jacobian(model, c.column(j)));
  }
  return config.cfl * dz / (config.u * rho);
}

}  // namespace

double stable_dt(const SimulationConfig& config, const IsothermModel& model, const GridState& state) {
  Field c;
  inverse_columns(model, state.w, c);
  return stable_dt_from_concentrations(config, model, c);
}

// ---------------------------------------------------------------------------
// Block-tridiagonal solver

BlockTridiagonal::BlockTridiagonal(std::size_t block_size, std::size_t blocks)
    : n_(block_size),
      m_(blocks),
      diag_(blocks * block_size * block_size, 0.0),
      lower_(blocks > 0 ? (blocks - 1) * block_size * block_size : 0, 0.0),
      upper_(blocks > 0 ? (blocks - 1) * block_size * block_size : 0, 0.0) {
  if (block_size == 0 || blocks == 0) throw std::invalid_argument("BlockTridiagonal: empty system");
}

namespace {

// y += M x for an n x n column-major block.
void block_multiply_add(std::span<const double> block, std::size_t n, std::span<const double> x,
                        std::span<double> y, double sign = 1.0) {
  for (std::size_t k = 0; k < n; ++k) {
    const double xk = sign * x[k];
    for (std::size_t i = 0; i < n; ++i) y[i] += block[k * n + i] * xk;
  }
}

}  // namespace

void BlockTridiagonal::multiply(const Field& x, Field& y) const {
  if (!y.same_shape(x)) y = Field(n_, m_);
  y.fill(0.0);
  for (std::size_t j = 0; j < m_; ++j) {
    block_multiply_add(diag(j), n_, x.column(j), y.column(j));
    if (j + 1 < m_) {
      block_multiply_add(upper(j), n_, x.column(j + 1), y.column(j));
      block_multiply_add(lower(j), n_, x.column(j), y.column(j + 1));
    }
  }
}

Field block_tridiagonal_solve(const BlockTridiagonal& system, const Field& rhs) {
  const std::size_t n = system.block_size();
  const std::size_t m = system.blocks();
  if (rhs.components() != n || rhs.cells() != m)
    throw std::invalid_argument("block_tridiagonal_solve: rhs shape mismatch");
  const std::size_t nn = n * n;

  // Forward sweep: pivot[j] = D_j - L_{j-1} U_{j-1}^{-1} Up_{j-1} (LU-factored),
  // coupling[j] = pivot_j^{-1} Up_j, x holds pivot_j^{-1} y_j.
  std::vector<double> pivot(m * nn);
  std::vector<std::size_t> perm(m * n);
  std::vector<double> coupling(m > 1 ? (m - 1) * nn : 0);
  Field x = rhs;
  std::vector<double> tmp(n);

  for (std::size_t j = 0; j < m; ++j) {
    std::span<double> pj(pivot.data() + j * nn, nn);
    auto dj = system.diag(j);
    std::copy(dj.begin(), dj.end(), pj.begin());
    auto xj = x.column(j);
    if (j > 0) {
      auto lo = system.lower(j - 1);
      std::span<const double> cprev(coupling.data() + (j - 1) * nn, nn);
      // pj -= L_{j-1} * coupling_{j-1}
      for (std::size_t col = 0; col < n; ++col) {
        block_multiply_add(lo, n, cprev.subspan(col * n, n), pj.subspan(col * n, n), -1.0);
      }
      block_multiply_add(lo, n, x.column(j - 1), xj, -1.0);
    }
    std::span<std::size_t> pv(perm.data() + j * n, n);
    try {
      lu_factor_inplace(pj, n, pv);
    } catch (const std::runtime_error&) {
      std::ostringstream os;
      os << "block_tridiagonal_solve: singular pivot block " << j;
      throw std::runtime_error(os.str());
    }
    lu_solve_inplace(pj, n, pv, xj);
    if (j + 1 < m) {
      std::span<double> cj(coupling.data() + j * nn, nn);
      auto up = system.upper(j);
      std::copy(up.begin(), up.end(), cj.begin());
      for (std::size_t col = 0; col < n; ++col) lu_solve_inplace(pj, n, pv, cj.subspan(col * n, n));
    }
  }
  // Back substitution.
  for (std::size_t jj = m - 1; jj-- > 0;) {
    std::span<const double> cj(coupling.data() + jj * nn, nn);
    block_multiply_add(cj, n, x.column(jj + 1), x.column(jj), -1.0);
  }
  return x;
}

double block_tridiagonal_residual(const BlockTridiagonal& system, const Field& x, const Field& rhs) {
  Field y;
  system.multiply(x, y);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < y.data().size(); ++k) {
    num = std::max(num, std::abs(y.data()[k] - rhs.data()[k]));
    den = std::max(den, std::abs(rhs.data()[k]));
  }
  return num / std::max(den, std::numeric_limits<double>::min());
}

// ---------------------------------------------------------------------------
// Implicit stage

namespace {

double inf_norm(std::span<const double> x) {
  double r = 0.0;
  for (double v : x) r = std::max(r, std::abs(v));
  return r;
}

}  // namespace

ImplicitStageResult implicit_stage(const SimulationConfig& config, const IsothermModel& model,
                                   const Field& G, double dt, const Field& initial_guess) {
  if (!(dt > 0.0)) throw std::invalid_argument("implicit_stage: dt must be positive");
  const std::size_t n = G.components();
  const std::size_t m = G.cells();
  ImplicitStageResult result;
  result.c = Field(n, m);

  if (config.dispersion == 0.0) {
    inverse_columns(model, G, result.c);
    return result;
  }
  require_same_shape(G, initial_guess, "implicit_stage");

  const double kappa = 0.5 * config.dispersion * dt;
  const double tol = config.newton_tol * (1.0 + inf_norm(G.data()));
  const LaplacianOperator lap(m);
  result.c = initial_guess;
  Field& c = result.c;

  Field wc(n, m), lap_c(n, m), residual(n, m);
  BlockTridiagonal jac(n, m);

  for (int it = 0;; ++it) {
    for (std::size_t j = 0; j < m; ++j) forward_with_jacobian(model, c.column(j), wc.column(j), jac.diag(j));
    lap.apply(c, lap_c);
    double worst = 0.0;
    std::size_t worst_cell = 0;
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const double r = wc(i, j) - kappa * lap_c(i, j) - G(i, j);
        residual(i, j) = -r;
        if (!(std::abs(r) <= worst)) {
          worst = std::abs(r);
          worst_cell = j;
        }
      }
    }
    result.residual = worst;
    result.iterations = it;
    if (worst <= tol) return result;
    if (it == config.newton_max_iter || !std::isfinite(worst)) {
      std::ostringstream os;
      os << "implicit_stage: Newton did not converge after " << it << " iterations; worst residual "
         << worst << " at cell " << worst_cell;
      throw ConvergenceError(os.str());
    }
    for (std::size_t j = 0; j < m; ++j) {
      auto d = jac.diag(j);
      const double shift = kappa * lap.entry(j, j);
      for (std::size_t i = 0; i < n; ++i) d[i * n + i] -= shift;
      if (j + 1 < m) {
        const double off = -kappa * lap.entry(j, j + 1);
        auto up = jac.upper(j);
        auto lo = jac.lower(j);
        std::fill(up.begin(), up.end(), 0.0);
        std::fill(lo.begin(), lo.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          up[i * n + i] = off;
          lo[i * n + i] = off;
        }
      }
    }
    const Field delta = block_tridiagonal_solve(jac, residual);
    for (std::size_t k = 0; k < c.data().size(); ++k) c.data()[k] += delta.data()[k];
  }
}

ImplicitStageResult implicit_stage(const SimulationConfig& config, const IsothermModel& model,
                                   const GridState& state, const Field& G, double dt) {
  Field guess;
  inverse_columns(model, state.w, guess);
  return implicit_stage(config, model, G, dt, guess);
}

// ---------------------------------------------------------------------------
// Time integration

std::vector<double> total_mass(const Field& w, double dz) {
  const std::size_t n = w.components();
  std::vector<double> mass(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    // Neumaier summation.
    double sum = 0.0;
    double comp = 0.0;
    for (std::size_t j = 0; j < w.cells(); ++j) {
      const double x = w(i, j);
      const double t = sum + x;
      comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
      sum = t;
    }
    mass[i] = (sum + comp) * dz;
  }
  return mass;
}

namespace {

struct StageBuffers {
  Field c_now, fluxes, conv, G, w_half, diff, conv_half;
};

StepReport step_with(const SimulationConfig& config, const IsothermModel& model, GridState& state,
                     double dt, const Field& c_now, StageBuffers& buf) {
  const std::size_t n = state.w.components();
  const std::size_t m = state.cells();
  const double dz = state.dz();
  const FluxSettings settings = config.flux_settings();

  StepReport report;
  report.t = state.t;
  report.dt = dt;
  report.mass_before = total_mass(state.w, dz);

  // Stage 1: G = w^n + dt/2 L(w^n, t_n), then the implicit diffusion solve.
  interface_fluxes(settings, model, state.w, c_now,
                   inflow_concentration(model, config.injection, state.t), buf.fluxes);
  convective_from_fluxes(buf.fluxes, dz, buf.conv);
  buf.G = state.w;
  for (std::size_t k = 0; k < buf.G.data().size(); ++k) buf.G.data()[k] += 0.5 * dt * buf.conv.data()[k];

  const ImplicitStageResult stage = implicit_stage(config, model, buf.G, dt, c_now);
  report.newton_iterations = stage.iterations;
  const Field& c_half = stage.c;

  if (config.dispersion == 0.0) {
    buf.w_half = buf.G;
    buf.diff = Field(n, m);
  } else {
    forward_columns(model, c_half, buf.w_half);
    LaplacianOperator(m).apply(c_half, buf.diff);
    for (double& x : buf.diff.data()) x *= config.dispersion;
  }

  // Stage 2: explicit update with the midpoint state.
  const double t_half = state.t + 0.5 * dt;
  interface_fluxes(settings, model, buf.w_half, c_half,
                   inflow_concentration(model, config.injection, t_half), buf.fluxes);
  convective_from_fluxes(buf.fluxes, dz, buf.conv_half);
  double min_w = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < state.w.data().size(); ++k) {
    double& x = state.w.data()[k];
    x += dt * (buf.conv_half.data()[k] + buf.diff.data()[k]);
    min_w = std::min(min_w, x);
  }
  state.t += dt;

  report.min_w = min_w;
  report.inflow.assign(n, 0.0);
  report.outflow.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    report.inflow[i] = buf.fluxes(i, 0);
    report.outflow[i] = buf.fluxes(i, m);
  }
  report.mass_after = total_mass(state.w, dz);
  // One scale for the whole state; a nearly empty component would otherwise
  // turn roundoff into a large relative defect.
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    scale = std::max({scale, std::abs(report.mass_before[i]), std::abs(report.mass_after[i]),
                      std::abs(dt * report.inflow[i]), std::abs(dt * report.outflow[i])});
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double expected = dt * (report.inflow[i] - report.outflow[i]);
    const double actual = report.mass_after[i] - report.mass_before[i];
    const double defect = std::abs(actual - expected);
    if (defect > 0.0) report.conservation_defect = std::max(report.conservation_defect, defect / scale);
  }
  return report;
}

}  // namespace

StepReport imex_step(const SimulationConfig& config, const IsothermModel& model, GridState& state,
                     double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("imex_step: dt must be positive");
  Field c_now;
  inverse_columns(model, state.w, c_now);
  StageBuffers buf;
  return step_with(config, model, state, dt, c_now, buf);
}

double MassLedger::imbalance() const {
  double scale = 0.0;
  for (std::size_t i = 0; i < initial.size(); ++i) {
    scale = std::max({scale, std::abs(initial[i]), std::abs(final[i]), std::abs(inflow[i]),
                      std::abs(outflow[i])});
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < initial.size(); ++i) {
    const double defect = std::abs(final[i] - initial[i] - (inflow[i] - outflow[i]));
    if (defect > 0.0) worst = std::max(worst, defect / scale);
  }
  return worst;
}

namespace {

Snapshot make_snapshot(const IsothermModel& model, const GridState& state, const Field& c) {
  Snapshot s;
  s.t = state.t;
  s.w = Field(state.w.components(), state.cells());
  s.c = Field(state.w.components(), state.cells());
  for (std::size_t j = 0; j < state.cells(); ++j) {
    model.to_user(state.w.column(j), s.w.column(j));
    model.to_user(c.column(j), s.c.column(j));
  }
  return s;
}

}  // namespace

RunResult run(const SimulationConfig& config, const IsothermModel& model, const StepObserver& observer) {
  const std::size_t n = model.size();
  config.validate(n);

  GridState state = initial_state(config, model);
  const double dz = state.dz();
  RunResult result;

  std::vector<double> stops;
  for (double t : config.output_times) stops.push_back(t);
  for (double t : config.injection.breakpoints()) {
    if (t > 0.0 && t < config.final_time) stops.push_back(t);
  }
  stops.push_back(config.final_time);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  std::vector<double> outputs = config.output_times;
  std::sort(outputs.begin(), outputs.end());
  outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());
  std::size_t next_output = 0;

  Field c_now;
  inverse_columns(model, state.w, c_now);
  const std::vector<double> mass0 = total_mass(state.w, dz);
  std::vector<double> inflow(n, 0.0), outflow(n, 0.0);

  while (next_output < outputs.size() && outputs[next_output] <= 0.0) {
    result.snapshots.push_back(make_snapshot(model, state, c_now));
    ++next_output;
  }

  StageBuffers buf;
  double dt_sum = 0.0;
  result.dt_min = std::numeric_limits<double>::infinity();
  result.min_w = *std::min_element(state.w.data().begin(), state.w.data().end());

  const auto start = std::chrono::steady_clock::now();
  std::size_t stop_index = 0;
  while (state.t < config.final_time) {
    while (stop_index < stops.size() && stops[stop_index] <= state.t) ++stop_index;
    const double target = stops[stop_index];
    double dt = std::min(stable_dt_from_concentrations(config, model, c_now), config.max_dt);
    bool lands = false;
    // Land exactly on the next stop; never leave a sliver behind it.
    if (state.t + dt * (1.0 + 1e-9) >= target) {
      dt = target - state.t;
      lands = true;
    }
    const StepReport report = step_with(config, model, state, dt, c_now, buf);
    if (lands) state.t = target;

    ++result.steps;
    dt_sum += dt;
    result.dt_min = std::min(result.dt_min, dt);
    result.dt_max = std::max(result.dt_max, dt);
    result.newton_iterations += report.newton_iterations;
    result.mass.max_step_defect = std::max(result.mass.max_step_defect, report.conservation_defect);
    if (report.min_w < 0.0) ++result.negative_steps;
    result.min_w = std::min(result.min_w, report.min_w);
    for (std::size_t i = 0; i < n; ++i) {
      inflow[i] += dt * report.inflow[i];
      outflow[i] += dt * report.outflow[i];
    }
    if (observer) observer(report, state);

    inverse_columns(model, state.w, c_now);
    while (next_output < outputs.size() && outputs[next_output] <= state.t) {
      result.snapshots.push_back(make_snapshot(model, state, c_now));
      ++next_output;
    }
  }
  const auto stop = std::chrono::steady_clock::now();
  result.wall_seconds = std::chrono::duration<double>(stop - start).count();
  if (result.steps == 0) result.dt_min = 0.0;
  result.dt_mean = result.steps > 0 ? dt_sum / static_cast<double>(result.steps) : 0.0;

  result.mass.initial = model.to_user(mass0);
  result.mass.final = model.to_user(total_mass(state.w, dz));
  result.mass.inflow = model.to_user(inflow);
  result.mass.outflow = model.to_user(outflow);
  return result;
}

}  // namespace edchrom
