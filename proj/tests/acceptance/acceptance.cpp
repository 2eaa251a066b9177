// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed below.

#include <CLI11.hpp>
#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "edchrom/flux.hpp"
#include "edchrom/harness.hpp"
#include "edchrom/isotherm.hpp"
#include "edchrom/spectral.hpp"
#include "edchrom/stepper.hpp"
#include "edchrom/transform.hpp"
#include "oracles.hpp"

using namespace edchrom;

namespace {

constexpr double kTableRelTol = 0.10;
constexpr double kTableOrderTol = 0.1;
constexpr double kOrderLow = 1.9;
constexpr double kOrderHigh = 2.1;
constexpr double kRoundTripTol = 1e-10;
constexpr double kEigenRelTol = 1e-8;
constexpr double kEigenResidualTol = 1e-9;
constexpr double kConservationTol = 1e-12;
constexpr double kEquivalenceTol = 1e-13;
constexpr double kNewtonTol = 1e-10;
constexpr double kPlateauBand = 0.02;   // relative band around a plateau level
constexpr double kPlateauLength = 0.02; // minimum plateau length in z

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;  // printed indented under the verdict
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// Independent evaluations, internal component order.

double toth_phi(double nu, double d) { return std::pow(1.0 + std::pow(d, nu), 1.0 / nu); }

double toth_phi_inverse(double nu, double p) { return std::pow(std::pow(p, nu) - 1.0, 1.0 / nu); }

double toth_phi_prime(double nu, double d) {
  return std::pow(1.0 + std::pow(d, nu), 1.0 / nu - 1.0) * std::pow(d, nu - 1.0);
}

Eigen::MatrixXd analytic_jacobian(const IsothermModel& model, const std::vector<double>& c) {
  const std::size_t n = c.size();
  const double nu = model.params().nu;
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) d += model.b()[i] * c[i];
  const double p = toth_phi(nu, d);
  const double dp = toth_phi_prime(nu, d);
  Eigen::MatrixXd J(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      J(i, k) = -c[i] * model.eta()[i] * dp * model.b()[k] / (p * p);
      if (i == k) J(i, k) += 1.0 + model.eta()[i] / p;
    }
  }
  return J;
}

std::vector<double> plain_forward(const IsothermModel& model, const std::vector<double>& c) {
  double d = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) d += model.b()[i] * c[i];
  const double p = toth_phi(model.params().nu, d);
  std::vector<double> w(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) w[i] = c[i] * (1.0 + model.eta()[i] / p);
  return w;
}

// Level of component i in a pure band travelling with the displacer:
// a_i / phi(b_i c) = a_d / phi(b_d c_d).
double pure_band_level(const IsothermParams& p, std::size_t i, std::size_t displacer, double cd) {
  const double target = p.a[i] * toth_phi(p.nu, p.b[displacer] * cd) / p.a[displacer];
  return toth_phi_inverse(p.nu, target) / p.b[i];
}

// ---------------------------------------------------------------------------
// Profile measurements on a user-order concentration row.

std::vector<double> row(const Field& f, std::size_t i) {
  std::vector<double> out(f.cells());
  for (std::size_t j = 0; j < f.cells(); ++j) out[j] = f(i, j);
  return out;
}

double z_at(std::size_t j, std::size_t m) { return (static_cast<double>(j) + 0.5) / static_cast<double>(m); }

// Longest run of cells satisfying pred; returns [first, last] or {1, 0} when empty.
std::pair<std::size_t, std::size_t> longest_run(const std::vector<double>& x,
                                                const std::function<bool(double)>& pred) {
  std::pair<std::size_t, std::size_t> best{1, 0};
  std::size_t start = 0, len = 0, best_len = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (pred(x[j])) {
      if (len == 0) start = j;
      ++len;
      if (len > best_len) {
        best_len = len;
        best = {start, j};
      }
    } else {
      len = 0;
    }
  }
  return best;
}

double run_length(std::pair<std::size_t, std::size_t> r, std::size_t m) {
  return r.second < r.first ? 0.0 : static_cast<double>(r.second - r.first + 1) / static_cast<double>(m);
}

// Position where x crosses level between cells j and j+1 (linear).
double crossing(const std::vector<double>& x, std::size_t j, double level) {
  const std::size_t m = x.size();
  const double t = (x[j] - level) / (x[j] - x[j + 1]);
  return z_at(j, m) + t / static_cast<double>(m);
}

// 10-90 % widths of the downstream and upstream edges of the band around the
// maximum, relative to the plateau level P.
std::pair<double, double> edge_widths(const std::vector<double>& x, double P) {
  const std::size_t peak = static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
  auto down = [&](double level) {
    std::size_t j = peak;
    while (j + 1 < x.size() && x[j + 1] >= level) ++j;
    return j + 1 < x.size() ? crossing(x, j, level) : 1.0;
  };
  auto up = [&](double level) {
    std::size_t j = peak;
    while (j > 0 && x[j - 1] >= level) --j;
    return j > 0 ? crossing(x, j - 1, level) : 0.0;
  };
  return {down(0.1 * P) - down(0.9 * P), up(0.9 * P) - up(0.1 * P)};
}

// Half-maximum position of the downstream edge.
double front_position(const std::vector<double>& x) {
  const double half = 0.5 * *std::max_element(x.begin(), x.end());
  std::size_t j = x.size() - 1;
  while (j > 0 && x[j] < half) --j;
  return j + 1 < x.size() ? crossing(x, j, half) : 1.0;
}

// Number of local extrema, ignoring differences below tol.
int turning_points(const std::vector<double>& x, double tol) {
  int turns = 0, last = 0;
  for (std::size_t j = 1; j < x.size(); ++j) {
    const double d = x[j] - x[j - 1];
    if (std::abs(d) <= tol) continue;
    const int s = d > 0 ? 1 : -1;
    if (last != 0 && s != last) ++turns;
    last = s;
  }
  return turns;
}

Snapshot final_snapshot(const Preset& p) {
  const IsothermModel model(p.isotherm);
  SimulationConfig cfg = p.config;
  cfg.output_times = {cfg.final_time};
  return run(cfg, model).snapshots.back();
}

Preset preset_with(int id, SchemeKind scheme, double nu, double T, std::size_t m) {
  Preset p = experiment_preset(id);
  p.config.scheme = scheme;
  p.isotherm.nu = nu;
  p.config.final_time = T;
  p.config.output_times = {T};
  p.config.cells = m;
  return p;
}

// ---------------------------------------------------------------------------
// Smooth-data study.

struct TableKey {
  SchemeKind scheme;
  double dispersion;
  double nu;
  std::size_t m;
  auto operator<=>(const TableKey&) const = default;
};

struct TableEntry {
  double error;  // e_m
  double order;  // NaN when not tabulated
};

std::map<TableKey, TableEntry> published_table() {
  const double none = std::nan("");
  // Columns: (1e-4, 0.95), (1e-4, 1), (1e-5, 0.95), (1e-5, 1); errors x 1e6.
  const std::vector<std::pair<SchemeKind, std::vector<std::vector<double>>>> blocks = {
      {SchemeKind::ChrUpw,
       {{1621.02, 1.77, 1570.05, 1.79, 1688.97, 1.74, 1629.61, 1.75},
        {476.04, 1.92, 455.49, 1.92, 506.58, 1.91, 482.93, 1.90},
        {125.65, 1.99, 120.47, 1.98, 135.02, 1.99, 129.44, 1.98},
        {31.62, 1.98, 30.63, 1.97, 33.88, 1.99, 32.80, 1.99},
        {8.03, none, 7.81, none, 8.51, none, 8.25, none}}},
      {SchemeKind::CompUpw5,
       {{963.81, 1.73, 909.76, 1.73, 985.31, 1.70, 923.35, 1.69},
        {290.32, 1.97, 274.51, 1.96, 303.42, 1.96, 286.59, 1.95},
        {73.97, 1.99, 70.42, 1.99, 78.07, 2.00, 74.38, 2.00},
        {18.58, 1.96, 17.71, 1.96, 19.54, 2.00, 18.64, 2.00},
        {4.76, none, 4.56, none, 4.89, none, 4.67, none}}},
      {SchemeKind::CompGlf,
       {{932.22, 1.71, 842.30, 1.65, 941.96, 1.68, 855.32, 1.62},
        {284.69, 1.95, 268.94, 1.94, 294.10, 1.92, 278.91, 1.92},
        {73.72, 1.99, 70.12, 1.99, 77.58, 1.99, 73.86, 1.99},
        {18.56, 1.96, 17.69, 1.96, 19.51, 2.00, 18.61, 2.00},
        {4.76, none, 4.55, none, 4.88, none, 4.66, none}}},
  };
  const std::size_t ms[] = {100, 200, 400, 800, 1600};
  const std::pair<double, double> cols[] = {{1e-4, 0.95}, {1e-4, 1.0}, {1e-5, 0.95}, {1e-5, 1.0}};
  std::map<TableKey, TableEntry> out;
  for (const auto& [scheme, rows] : blocks) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t k = 0; k < 4; ++k) {
        out[{scheme, cols[k].first, cols[k].second, ms[r]}] = {rows[r][2 * k] * 1e-6, rows[r][2 * k + 1]};
      }
    }
  }
  return out;
}

const std::vector<ErrorReport>& smooth_study(int jobs) {
  static const std::vector<ErrorReport> reports =
      table1_study(experiment_preset(4), {100, 200, 400, 800, 1600}, jobs);
  return reports;
}

Outcome check_table(int jobs) {
  const auto table = published_table();
  const auto& reports = smooth_study(jobs);
  Outcome o;
  int checked = 0, bad = 0;
  double worst_rel = 0.0, worst_order = 0.0;
  for (const ErrorReport& r : reports) {
    if (!r.failure.empty()) {
      ++bad;
      o.notes.push_back(fmt("%s nu=%g Da=%g m=%zu failed: %s", std::string(scheme_name(r.scheme)).c_str(),
                            r.nu, r.dispersion, r.cells, r.failure.c_str()));
      continue;
    }
    const auto it = table.find({r.scheme, r.dispersion, r.nu, r.cells});
    if (it == table.end()) continue;
    const TableEntry& t = it->second;
    const double rel = std::abs(r.error - t.error) / t.error;
    worst_rel = std::max(worst_rel, rel);
    bool ok = rel <= kTableRelTol;
    std::string order_text = "-";
    if (!std::isnan(t.order)) {
      const double got = r.order ? *r.order : std::nan("");
      const double dev = std::abs(got - t.order);
      worst_order = std::max(worst_order, std::isnan(dev) ? INFINITY : dev);
      ok = ok && dev <= kTableOrderTol;
      order_text = fmt("%.2f (%.2f)", got, t.order);
    }
    ++checked;
    if (!ok) ++bad;
    o.notes.push_back(fmt("%-9s Da=%-6g nu=%-4g m=%-5zu e=%9.2f (%8.2f) %+6.1f%%  theta=%s%s",
                          std::string(scheme_name(r.scheme)).c_str(), r.dispersion, r.nu, r.cells,
                          r.error * 1e6, t.error * 1e6, 100.0 * (r.error - t.error) / t.error,
                          order_text.c_str(), ok ? "" : "  <-"));
  }
  o.pass = bad == 0 && checked == static_cast<int>(table.size());
  o.detail = fmt("%d/%d entries within %.0f%% and theta +-%.1f; worst rel %.3f, worst theta dev %.3f",
                 checked - bad, static_cast<int>(table.size()), 100 * kTableRelTol, kTableOrderTol,
                 worst_rel, worst_order);
  return o;
}

Outcome check_order(int jobs) {
  const auto& reports = smooth_study(jobs);
  Outcome o;
  int count = 0, bad = 0;
  double lo = INFINITY, hi = -INFINITY;
  for (const ErrorReport& r : reports) {
    if (r.cells != 800) continue;
    ++count;
    if (!r.order) {
      ++bad;
      continue;
    }
    lo = std::min(lo, *r.order);
    hi = std::max(hi, *r.order);
    if (!(*r.order >= kOrderLow && *r.order <= kOrderHigh)) {
      ++bad;
      o.notes.push_back(fmt("%s Da=%g nu=%g theta_800=%.3f", std::string(scheme_name(r.scheme)).c_str(),
                            r.dispersion, r.nu, *r.order));
    }
  }
  o.pass = count == 12 && bad == 0;
  o.detail = fmt("%d runs at m=800, theta in [%.3f, %.3f], required [%.1f, %.1f]", count, lo, hi, kOrderLow,
                 kOrderHigh);
  return o;
}

// ---------------------------------------------------------------------------

Outcome check_bijection() {
  std::mt19937_64 rng(101);
  constexpr int kTrips = 100000;
  constexpr int kPerModel = 1000;
  double worst = 0.0;
  long bracket_violations = 0;
  long trips = 0;
  int combos = 0;
  std::uniform_real_distribution<double> uw(-4.0, 1.5);
  for (std::size_t n = 1; n <= 5; ++n) {
    for (double nu : {0.5, 0.6, 0.8, 0.9, 0.95, 1.0}) {
      ++combos;
      for (int start = 0; start < kTrips; start += kPerModel) {
        const IsothermModel model(oracle::random_params(rng, n, nu));
        for (int k = 0; k < kPerModel; k += 2) {
          // c -> w -> c
          const auto c = oracle::random_concentration(rng, n);
          const auto w = plain_forward(model, c);
          const auto back = inverse(model, w);
          for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(back[i] - c[i]) / c[i]);

          // w -> c -> w, with the root bracket
          std::vector<double> w2(n);
          for (auto& x : w2) x = std::pow(10.0, uw(rng));
          const double p = solve_p(model, w2);
          double bw = 0.0;
          for (std::size_t i = 0; i < n; ++i) bw += model.b()[i] * w2[i];
          if (!(p >= 1.0 && p <= toth_phi(nu, bw))) ++bracket_violations;
          const auto w3 = plain_forward(model, inverse(model, w2));
          for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(w3[i] - w2[i]) / w2[i]);
          trips += 2;
        }
      }
    }
  }
  Outcome o;
  o.pass = worst <= kRoundTripTol && bracket_violations == 0;
  o.detail = fmt("%ld round trips over %d (N, nu) combinations, max rel error %.2e (tol %.0e), %ld bracket "
                 "violations",
                 trips, combos, worst, kRoundTripTol, bracket_violations);
  return o;
}

Outcome check_spectral() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> un(1, 5);
  std::uniform_real_distribution<double> unu(0.5, 1.0);
  constexpr int kStates = 10000;
  int interlace_bad = 0, mu_bad = 0;
  double worst_eig = 0.0, worst_res = 0.0;
  for (int s = 0; s < kStates; ++s) {
    const std::size_t n = static_cast<std::size_t>(un(rng));
    const double nu = s % 4 == 0 ? 1.0 : unu(rng);
    const IsothermModel model(oracle::random_params(rng, n, nu));
    const auto c = oracle::random_concentration(rng, n);
    const SpectralDecomp d = decompose_at_concentration(model, c);
    const auto& v = d.parts.v;
    const double top = 1.0 + model.eta()[n - 1];

    bool ok = 1.0 < d.lambda[0] && v[n - 1] <= top;
    for (std::size_t j = 0; j < n; ++j) {
      ok = ok && d.lambda[j] < v[j];
      if (j > 0) ok = ok && v[j - 1] < d.lambda[j];
    }
    if (!ok) ++interlace_bad;

    bool mu_ok = d.mu[0] < 1.0 && d.mu[n - 1] > 1.0 / top;
    for (std::size_t j = 1; j < n; ++j) mu_ok = mu_ok && d.mu[j] < d.mu[j - 1];
    if (!mu_ok) ++mu_bad;

    const Eigen::MatrixXd J = analytic_jacobian(model, c);
    const auto ref = oracle::dense_eigenvalues(J);
    for (std::size_t j = 0; j < n; ++j) {
      worst_eig = std::max(worst_eig, std::abs(d.lambda[j] - ref[j]) / std::abs(ref[j]));
      Eigen::VectorXd r(n);
      for (std::size_t i = 0; i < n; ++i) r(i) = d.R(i, j);
      const double res = (J * r - d.lambda[j] * r).lpNorm<Eigen::Infinity>() /
                         (d.lambda[j] * r.lpNorm<Eigen::Infinity>());
      worst_res = std::max(worst_res, res);
    }
  }
  Outcome o;
  o.pass = interlace_bad == 0 && mu_bad == 0 && worst_eig <= kEigenRelTol && worst_res <= kEigenResidualTol;
  o.detail = fmt("%d states: interlacing violations %d, mu-bound violations %d, eigenvalue rel dev %.2e "
                 "(tol %.0e), residual %.2e (tol %.0e)",
                 kStates, interlace_bad, mu_bad, worst_eig, kEigenRelTol, worst_res, kEigenResidualTol);
  return o;
}

Outcome check_conservation() {
  struct Case {
    std::string label;
    Preset preset;
  };
  std::vector<Case> cases;
  for (int id = 1; id <= 4; ++id) cases.push_back({fmt("exp%d preset", id), experiment_preset(id)});
  for (int id : {2, 3}) cases.push_back({fmt("exp%d nu=0.9 T=16", id), preset_with(id, experiment_preset(id).config.scheme, 0.9, 16.0, 800)});
  for (SchemeKind s : kAllSchemes) {
    for (double da : {0.0, 1e-5}) {
      Preset p = preset_with(1, s, 0.9, 11.0, 200);
      p.config.dispersion = da;
      cases.push_back({fmt("exp1 %s Da=%g m=200", std::string(scheme_name(s)).c_str(), da), p});
    }
  }
  for (SchemeKind s : {SchemeKind::ChrUpw, SchemeKind::CompUpw5, SchemeKind::CompGlf}) {
    for (double da : {1e-4, 1e-5}) {
      Preset p = experiment_preset(4);
      p.config.scheme = s;
      p.config.dispersion = da;
      p.isotherm.nu = 0.95;
      cases.push_back({fmt("exp4 %s Da=%g", std::string(scheme_name(s)).c_str(), da), p});
    }
  }

  Outcome o;
  std::size_t steps = 0, bad = 0;
  double worst = 0.0;
  for (const Case& c : cases) {
    const IsothermModel model(c.preset.isotherm);
    double case_worst = 0.0;
    run(c.preset.config, model, [&](const StepReport& r, const GridState&) {
      ++steps;
      case_worst = std::max(case_worst, r.conservation_defect);
      if (!(r.conservation_defect <= kConservationTol)) ++bad;
    });
    worst = std::max(worst, case_worst);
    if (case_worst > kConservationTol) o.notes.push_back(fmt("%s: worst defect %.2e", c.label.c_str(), case_worst));
  }

  // The dispersion term alone moves no mass.
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> uc(0.0, 2.0);
  double worst_diff = 0.0;
  for (int k = 0; k < 200; ++k) {
    const IsothermModel model(oracle::random_params(rng, 3, 0.9));
    SimulationConfig cfg;
    cfg.dispersion = 1e-4;
    GridState s;
    s.w = Field(3, 50 + k);
    double total = 0.0;
    for (auto& x : s.w.data()) total += (x = uc(rng));
    const Field D = diffusion_operator(cfg, model, s);
    double amax = 0.0;
    for (double x : D.data()) amax = std::max(amax, std::abs(x));
    for (std::size_t i = 0; i < 3; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < D.cells(); ++j) sum += D(i, j);
      worst_diff = std::max(worst_diff, std::abs(sum) / (amax * static_cast<double>(D.cells())));
    }
  }

  o.pass = bad == 0 && worst_diff <= kConservationTol;
  o.detail = fmt("%zu steps over %zu runs, worst step defect %.2e (tol %.0e), %zu violations; dispersion "
                 "column-sum %.2e",
                 steps, cases.size(), worst, kConservationTol, bad, worst_diff);
  return o;
}

Outcome check_single_component() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> ua(0.5, 8.0), ub(0.2, 6.0), ueps(0.3, 0.7), unu(0.5, 1.0),
      uw(0.0, 3.0), uinj(0.0, 1.0);
  std::uniform_int_distribution<int> um(5, 60);
  double worst_upw = 0.0, worst_glf = 0.0;
  constexpr int kTrials = 2000;
  for (int k = 0; k < kTrials; ++k) {
    const double nu = k % 3 == 0 ? 1.0 : unu(rng);
    const IsothermModel model({{ua(rng)}, {ub(rng)}, ueps(rng), nu});
    const std::size_t m = static_cast<std::size_t>(um(rng));
    Field w(1, m);
    const int kind = k % 3;
    for (std::size_t j = 0; j < m; ++j) {
      const double z = z_at(j, m);
      if (kind == 0) w(0, j) = uw(rng);
      else if (kind == 1) w(0, j) = 2.0 * std::exp(-40.0 * (z - 0.4) * (z - 0.4));
      else w(0, j) = z < 0.5 ? 1.5 : 0.1;
    }
    InjectionSchedule inj(1);
    inj.add(0.0, 1.0, {uinj(rng)});
    const double u = 0.2;
    const double alpha = u;
    auto rel = [](const Field& a, const Field& b) {
      double diff = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < a.data().size(); ++i) {
        diff = std::max(diff, std::abs(a.data()[i] - b.data()[i]));
        scale = std::max(scale, std::abs(b.data()[i]));
      }
      return scale > 0.0 ? diff / scale : diff;
    };
    worst_upw = std::max(worst_upw, rel(interface_fluxes(SchemeKind::ChrUpw, model, u, alpha, w, inj, 0.5),
                                        interface_fluxes(SchemeKind::CompUpw5, model, u, alpha, w, inj, 0.5)));
    worst_glf = std::max(worst_glf, rel(interface_fluxes(SchemeKind::ChrGlf, model, u, alpha, w, inj, 0.5),
                                        interface_fluxes(SchemeKind::CompGlf, model, u, alpha, w, inj, 0.5)));
  }
  Outcome o;
  o.pass = worst_upw <= kEquivalenceTol && worst_glf <= kEquivalenceTol;
  o.detail = fmt("%d random states: CHR-UPW vs COMP-UPW5 %.2e, CHR-GLF vs COMP-GLF %.2e (tol %.0e)", kTrials,
                 worst_upw, worst_glf, kEquivalenceTol);
  return o;
}

Outcome check_oscillation() {
  const Preset base = experiment_preset(1);
  const double cd = base.config.injection.intervals().back().concentration[2];
  const double P = pure_band_level(base.isotherm, 0, 2, cd);
  std::map<SchemeKind, Snapshot> snaps;
  for (SchemeKind s : {SchemeKind::ChrUpw, SchemeKind::CompUpw5, SchemeKind::CompUpw1}) {
    Preset p = preset_with(1, s, 1.0, 8.0, 800);
    p.config.dispersion = 0.0;
    snaps[s] = final_snapshot(p);
  }
  auto c1 = [&](SchemeKind s) { return row(snaps[s].c, 0); };
  auto overshoot = [&](SchemeKind s) {
    const auto x = c1(s);
    return *std::max_element(x.begin(), x.end()) - P;
  };
  const double os_chr = overshoot(SchemeKind::ChrUpw);
  const double os_comp = overshoot(SchemeKind::CompUpw5);

  const Snapshot& low = snaps[SchemeKind::CompUpw1];
  double min_c = INFINITY;
  for (double x : low.c.data()) min_c = std::min(min_c, x);
  int turns = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto x = row(low.c, i);
    turns += turning_points(x, 1e-12 * *std::max_element(x.begin(), x.end()));
  }
  const bool oscillation_free = min_c >= 0.0 && turns == 2;

  const auto [down_chr, up_chr] = edge_widths(c1(SchemeKind::ChrUpw), P);
  const auto [down_low, up_low] = edge_widths(c1(SchemeKind::CompUpw1), P);
  const bool wider = down_low > down_chr && up_low > up_chr;

  Outcome o;
  o.pass = os_chr < os_comp && oscillation_free && wider;
  o.detail = fmt("plateau c1=%.6f; overshoot CHR-UPW %.2e < COMP-UPW5 %.2e; COMP-UPW1 min c %.1e, extrema %d "
                 "(expect 2); 10-90%% widths COMP-UPW1 %.4f/%.4f vs CHR-UPW %.4f/%.4f",
                 P, os_chr, os_comp, min_c, turns, down_low, up_low, down_chr, up_chr);
  return o;
}

Outcome check_isotachic() {
  Outcome o;
  bool pass = true;
  std::ostringstream detail;

  {
    const Preset p = preset_with(1, SchemeKind::ChrUpw, 1.0, 11.0, 800);
    const Snapshot s = final_snapshot(p);
    const double cd = p.config.injection.intervals().back().concentration[2];
    std::pair<std::size_t, std::size_t> runs[2];
    for (std::size_t i = 0; i < 2; ++i) {
      const double P = pure_band_level(p.isotherm, i, 2, cd);
      const auto x = row(s.c, i);
      runs[i] = longest_run(x, [&](double v) { return std::abs(v - P) <= kPlateauBand * P; });
      const double len = run_length(runs[i], 800);
      double mean = 0.0;
      for (std::size_t j = runs[i].first; j <= runs[i].second && len > 0; ++j) mean += x[j];
      if (len > 0) mean /= static_cast<double>(runs[i].second - runs[i].first + 1);
      pass = pass && len >= kPlateauLength;
      detail << fmt("exp1 c%zu plateau %.4f long at %.5f (pure band %.5f); ", i + 1, len, mean, P);
    }
    // Component 2 is retained more strongly and sits upstream of component 1.
    const bool disjoint = runs[1].second < runs[0].first;
    pass = pass && disjoint;
    detail << (disjoint ? "disjoint; " : "overlapping; ");
  }

  for (auto [nu, T] : {std::pair{1.0, 11.0}, std::pair{0.9, 16.0}}) {
    const Preset p = preset_with(3, SchemeKind::ChrUpw, nu, T, 800);
    const Snapshot s = final_snapshot(p);
    for (std::size_t i = 0; i < 2; ++i) {
      const auto x = row(s.c, i);
      const double top = *std::max_element(x.begin(), x.end());
      const double len =
          run_length(longest_run(x, [&](double v) { return std::abs(v - top) <= kPlateauBand * top; }), 800);
      pass = pass && len < kPlateauLength;
      detail << fmt("exp3 nu=%g c%zu flat top %.4f; ", nu, i + 1, len);
    }
  }
  o.pass = pass;
  o.detail = detail.str() + fmt("plateau = run within %.0f%%, rectangular if >= %.2f", 100 * kPlateauBand,
                                kPlateauLength);
  return o;
}

Outcome check_heterogeneity() {
  const double nus[] = {0.6, 0.9, 1.0};
  std::vector<std::vector<double>> fronts;
  for (double nu : nus) {
    const Snapshot s = final_snapshot(preset_with(1, SchemeKind::ChrUpw, nu, 4.0, 800));
    std::vector<double> f;
    for (std::size_t i = 0; i < 3; ++i) f.push_back(front_position(row(s.c, i)));
    fronts.push_back(f);
  }
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t i = 0; i < 3; ++i) {
    ok = ok && fronts[0][i] > fronts[1][i] && fronts[1][i] > fronts[2][i];
    detail << fmt("c%zu %.4f > %.4f > %.4f; ", i + 1, fronts[0][i], fronts[1][i], fronts[2][i]);
  }
  Outcome o;
  o.pass = ok;
  std::string text = detail.str();
  text.resize(text.size() - 2);
  o.detail = "half-max fronts at T=4 for nu=0.6, 0.9, 1: " + text;
  return o;
}

Outcome check_linear_algebra() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ug(0.05, 2.5), uda(1e-4, 5e-2), udt(1e-3, 5e-2),
      unu(0.5, 1.0);
  double worst_block = 0.0, worst_newton = 0.0;
  int instances = 0;
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t m = 1; m <= 8; ++m) {
      for (int trial = 0; trial < 10; ++trial) {
        ++instances;
        // Block tridiagonal against dense LU.
        BlockTridiagonal sys(n, m);
        for (std::size_t j = 0; j < m; ++j) {
          for (auto& x : sys.diag(j)) x = u(rng);
          for (std::size_t i = 0; i < n; ++i) sys.diag(j)[i * n + i] += 2.0 + 2.0 * n;
          if (j + 1 < m) {
            for (auto& x : sys.lower(j)) x = u(rng);
            for (auto& x : sys.upper(j)) x = u(rng);
          }
        }
        Field rhs(n, m);
        for (auto& x : rhs.data()) x = u(rng);
        const Field x = block_tridiagonal_solve(sys, rhs);
        const Eigen::MatrixXd M = oracle::assemble(sys);
        Eigen::VectorXd b(n * m);
        for (std::size_t k = 0; k < n * m; ++k) b(k) = rhs.data()[k];
        const Eigen::VectorXd ref = M.fullPivLu().solve(b);
        worst_block = std::max(worst_block, (Eigen::Map<const Eigen::VectorXd>(x.data().data(), n * m) - ref)
                                                    .lpNorm<Eigen::Infinity>() /
                                                ref.lpNorm<Eigen::Infinity>());

        // Implicit stage against a dense Newton on the whole system.
        const IsothermModel model(oracle::random_params(rng, n, trial % 2 ? 1.0 : unu(rng)));
        SimulationConfig cfg;
        cfg.cells = m;
        cfg.dispersion = uda(rng);
        const double dt = udt(rng);
        Field G(n, m);
        for (auto& g : G.data()) g = ug(rng);
        const ImplicitStageResult res = implicit_stage(cfg, model, G, dt, Field(n, m, 0.1));

        const double kappa = cfg.dispersion * dt / 2.0;
        const double inv = static_cast<double>(m * m);
        Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(m, m);
        for (std::size_t j = 0; j + 1 < m; ++j) {
          lap(j, j) -= inv;
          lap(j + 1, j + 1) -= inv;
          lap(j, j + 1) += inv;
          lap(j + 1, j) += inv;
        }
        const std::size_t size = n * m;
        Eigen::VectorXd c = Eigen::VectorXd::Constant(size, 0.1);
        auto residual = [&](const Eigen::VectorXd& y) {
          Eigen::VectorXd r(size);
          for (std::size_t j = 0; j < m; ++j) {
            std::vector<double> cj(n);
            for (std::size_t i = 0; i < n; ++i) cj[i] = y(j * n + i);
            const auto w = plain_forward(model, cj);
            for (std::size_t i = 0; i < n; ++i) {
              double diff = 0.0;
              for (std::size_t k = 0; k < m; ++k) diff += y(k * n + i) * lap(k, j);
              r(j * n + i) = w[i] - kappa * diff - G(i, j);
            }
          }
          return r;
        };
        for (int it = 0; it < 200; ++it) {
          const Eigen::VectorXd r = residual(c);
          Eigen::MatrixXd J = Eigen::MatrixXd::Zero(size, size);
          for (std::size_t j = 0; j < m; ++j) {
            std::vector<double> cj(n);
            for (std::size_t i = 0; i < n; ++i) cj[i] = std::max(c(j * n + i), 1e-300);
            J.block(j * n, j * n, n, n) = analytic_jacobian(model, cj);
            for (std::size_t k = 0; k < m; ++k)
              for (std::size_t i = 0; i < n; ++i) J(j * n + i, k * n + i) -= kappa * lap(k, j);
          }
          Eigen::VectorXd step = J.fullPivLu().solve(-r);
          // Damp to stay in the positive orthant.
          double t = 1.0;
          while ((c + t * step).minCoeff() <= 0.0) t *= 0.5;
          c += t * step;
          if (step.lpNorm<Eigen::Infinity>() <= 1e-15 * c.lpNorm<Eigen::Infinity>()) break;
        }
        double diff = 0.0;
        for (std::size_t k = 0; k < size; ++k) diff = std::max(diff, std::abs(res.c.data()[k] - c(k)));
        worst_newton = std::max(worst_newton, diff / c.lpNorm<Eigen::Infinity>());
      }
    }
  }
  Outcome o;
  o.pass = worst_block <= kNewtonTol && worst_newton <= kNewtonTol;
  o.detail = fmt("%d instances (N<=3, m<=8): block tridiagonal rel dev %.2e, implicit stage rel dev %.2e "
                 "(tol %.0e)",
                 instances, worst_block, worst_newton, kNewtonTol);
  return o;
}

struct Criterion {
  std::string name;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edchrom acceptance suite"};
  std::vector<std::string> only;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool verbose = false;
  app.add_option("--only", only, "Run only the named criteria");
  app.add_option("--jobs", jobs, "Worker threads for the smooth-data study")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", verbose, "Print per-entry notes for passing criteria too");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {"smooth-data-regression", [&] { return check_table(jobs); }},
      {"convergence-order", [&] { return check_order(jobs); }},
      {"transform-bijection", check_bijection},
      {"spectral-oracle", check_spectral},
      {"conservation", check_conservation},
      {"single-component-equivalence", check_single_component},
      {"oscillation", check_oscillation},
      {"isotachic-train", check_isotachic},
      {"heterogeneity-trend", check_heterogeneity},
      {"newton-linear-algebra", check_linear_algebra},
  };
  const std::set<std::string> wanted(only.begin(), only.end());
  for (const auto& name : wanted) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const Criterion& c) { return c.name == name; })) {
      std::fprintf(stderr, "unknown criterion '%s'\n", name.c_str());
      return 2;
    }
  }

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.name)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %-29s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), secs);
    if (!o.pass || verbose) {
      for (const auto& note : o.notes) std::printf("     %s\n", note.c_str());
    }
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
