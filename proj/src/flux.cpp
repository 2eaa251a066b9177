#include "edchrom/flux.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "edchrom/spectral.hpp"
#include "edchrom/transform.hpp"

namespace edchrom {

namespace {

constexpr std::array<std::string_view, 6> kSchemeNames = {"CHR-UPW", "COMP-UPW1", "COMP-UPW5",
                                                          "COMP-GLF", "CHR-GLF", "MUSCL"};

}  // namespace

std::string_view scheme_name(SchemeKind scheme) {
  return kSchemeNames[static_cast<std::size_t>(scheme)];
}

SchemeKind parse_scheme(std::string_view name) {
  for (std::size_t k = 0; k < kSchemeNames.size(); ++k) {
    if (kSchemeNames[k] == name) return static_cast<SchemeKind>(k);
  }
  std::ostringstream os;
  os << "unknown scheme '" << name << "'; valid schemes are";
  for (auto n : kSchemeNames) os << ' ' << n;
  throw std::invalid_argument(os.str());
}

bool is_characteristic(SchemeKind scheme) {
  return scheme == SchemeKind::ChrUpw || scheme == SchemeKind::ChrGlf;
}

void InjectionSchedule::add(double start, double end, std::vector<double> concentration) {
  if (components_ == 0) components_ = concentration.size();
  if (concentration.size() != components_)
    throw std::invalid_argument("injection: wrong number of components");
  if (!(end > start)) throw std::invalid_argument("injection: interval end must exceed start");
  for (double x : concentration) {
    if (!(x >= 0.0)) throw std::invalid_argument("injection: concentrations must be nonnegative");
  }
  for (const Interval& other : intervals_) {
    if (start < other.end && other.start < end)
      throw std::invalid_argument("injection: intervals overlap");
  }
  intervals_.push_back({start, end, std::move(concentration)});
  std::sort(intervals_.begin(), intervals_.end(),
            [](const Interval& x, const Interval& y) { return x.start < y.start; });
}

void InjectionSchedule::evaluate(double t, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const Interval& iv : intervals_) {
    if (t >= iv.start && t < iv.end) {
      std::copy(iv.concentration.begin(), iv.concentration.end(), out.begin());
      return;
    }
  }
}

std::vector<double> InjectionSchedule::at(double t) const {
  std::vector<double> out(components_);
  evaluate(t, out);
  return out;
}

std::vector<double> InjectionSchedule::breakpoints() const {
  std::vector<double> pts;
  for (const Interval& iv : intervals_) {
    pts.push_back(iv.start);
    if (std::isfinite(iv.end)) pts.push_back(iv.end);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

std::vector<double> inflow_concentration(const IsothermModel& model,
                                         const InjectionSchedule& schedule, double t) {
  std::vector<double> user(model.size(), 0.0);
  if (schedule.components() != 0) {
    if (schedule.components() != model.size())
      throw std::invalid_argument("injection schedule has the wrong number of components");
    schedule.evaluate(t, user);
  }
  return model.to_internal(user);
}

std::vector<double> physical_flux(const IsothermModel& model, double u, std::span<const double> w) {
  std::vector<double> f = inverse(model, w);
  for (double& x : f) x *= u;
  return f;
}

void inverse_columns(const IsothermModel& model, const Field& w, Field& c) {
  if (!c.same_shape(w)) c = Field(w.components(), w.cells());
  for (std::size_t j = 0; j < w.cells(); ++j) inverse(model, w.column(j), c.column(j));
}

void forward_columns(const IsothermModel& model, const Field& c, Field& w) {
  if (!w.same_shape(c)) w = Field(c.components(), c.cells());
  for (std::size_t j = 0; j < c.cells(); ++j) forward(model, c.column(j), w.column(j));
}

namespace {

class FluxBuilder {
 public:
  FluxBuilder(const FluxSettings& s, const IsothermModel& model, const Field& w, const Field& c)
      : s_(s), model_(model), w_(w), n_(w.components()), m_(w.cells()), f_(n_, m_) {
    for (std::size_t j = 0; j < m_; ++j) {
      for (std::size_t i = 0; i < n_; ++i) f_(i, j) = s.u * c(i, j);
    }
  }

  // Clamped cell index: constant extrapolation into the ghost cells.
  std::size_t cell(std::ptrdiff_t k) const {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(m_) - 1));
  }

  // Flux at the interface between cells j and j + 1 (0-based, j + 1 < m).
  void interior(std::size_t j, std::span<double> out) {
    const auto jj = static_cast<std::ptrdiff_t>(j);
    switch (s_.scheme) {
      case SchemeKind::CompUpw1:
        for (std::size_t i = 0; i < n_; ++i) out[i] = f_(i, j);
        break;
      case SchemeKind::CompUpw5:
        for (std::size_t i = 0; i < n_; ++i) {
          double st[5];
          for (int k = 0; k < 5; ++k) st[k] = f_(i, cell(jj - 2 + k));
          out[i] = weno5_left(std::span<const double, 5>(st), s_.weno_epsilon);
        }
        break;
      case SchemeKind::CompGlf:
        for (std::size_t i = 0; i < n_; ++i) {
          double plus[5], minus[5];
          for (int k = 0; k < 5; ++k) {
            const std::size_t cp = cell(jj - 2 + k);
            plus[k] = 0.5 * (f_(i, cp) + s_.alpha * w_(i, cp));
            const std::size_t cm = cell(jj + 3 - k);
            minus[k] = 0.5 * (f_(i, cm) - s_.alpha * w_(i, cm));
          }
          out[i] = weno5_left(std::span<const double, 5>(plus), s_.weno_epsilon) +
                   weno5_left(std::span<const double, 5>(minus), s_.weno_epsilon);
        }
        break;
      case SchemeKind::Muscl: {
        std::vector<double> state(n_);
        const std::size_t l = cell(jj - 1), r = cell(jj + 1);
        for (std::size_t i = 0; i < n_; ++i) {
          state[i] = w_(i, j) + 0.5 * minmod(w_(i, j) - w_(i, l), w_(i, r) - w_(i, j));
        }
        inverse(model_, state, out);
        for (std::size_t i = 0; i < n_; ++i) out[i] *= s_.u;
        break;
      }
      case SchemeKind::ChrUpw:
      case SchemeKind::ChrGlf:
        characteristic(j, out);
        break;
    }
  }

  const Field& cell_fluxes() const { return f_; }

 private:
  void characteristic(std::size_t j, std::span<double> out) {
    const auto jj = static_cast<std::ptrdiff_t>(j);
    const SpectralDecomp decomp = decompose_at_interface(model_, w_.column(j), w_.column(j + 1));
    const bool glf = s_.scheme == SchemeKind::ChrGlf;
    // Projected stencil values, cells j-2..j+3, laid out [cell][field].
    proj_plus_.assign(6 * n_, 0.0);
    proj_minus_.assign(6 * n_, 0.0);
    tmp_.resize(n_);
    for (int k = 0; k < 6; ++k) {
      if (!glf && k == 5) break;
      const std::size_t cc = cell(jj - 2 + k);
      for (std::size_t i = 0; i < n_; ++i)
        tmp_[i] = glf ? 0.5 * (f_(i, cc) + s_.alpha * w_(i, cc)) : f_(i, cc);
      decomp.R_factor.solve_inplace(tmp_);
      std::copy(tmp_.begin(), tmp_.end(), proj_plus_.begin() + k * n_);
      if (glf) {
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = 0.5 * (f_(i, cc) - s_.alpha * w_(i, cc));
        decomp.R_factor.solve_inplace(tmp_);
        std::copy(tmp_.begin(), tmp_.end(), proj_minus_.begin() + k * n_);
      }
    }
    std::vector<double> field_flux(n_);
    for (std::size_t l = 0; l < n_; ++l) {
      double st[5];
      for (int k = 0; k < 5; ++k) st[k] = proj_plus_[k * n_ + l];
      field_flux[l] = weno5_left(std::span<const double, 5>(st), s_.weno_epsilon);
      if (glf) {
        for (int k = 0; k < 5; ++k) st[k] = proj_minus_[(5 - k) * n_ + l];
        field_flux[l] += weno5_left(std::span<const double, 5>(st), s_.weno_epsilon);
      }
    }
    decomp.R.multiply(field_flux, out);
  }

  const FluxSettings& s_;
  const IsothermModel& model_;
  const Field& w_;
  std::size_t n_, m_;
  Field f_;
  std::vector<double> proj_plus_, proj_minus_, tmp_;
};

}  // namespace

void interface_fluxes(const FluxSettings& settings, const IsothermModel& model, const Field& w,
                      const Field& c, std::span<const double> inflow_c, Field& out) {
  require_same_shape(w, c, "interface_fluxes");
  const std::size_t n = w.components();
  const std::size_t m = w.cells();
  if (n != model.size()) throw std::invalid_argument("interface_fluxes: wrong number of components");
  if (m == 0) throw std::invalid_argument("interface_fluxes: empty grid");
  if (out.components() != n || out.cells() != m + 1) out = Field(n, m + 1);

  FluxBuilder builder(settings, model, w, c);
  for (std::size_t i = 0; i < n; ++i) out(i, 0) = settings.u * inflow_c[i];
  for (std::size_t j = 0; j + 1 < m; ++j) builder.interior(j, out.column(j + 1));
  for (std::size_t i = 0; i < n; ++i) out(i, m) = builder.cell_fluxes()(i, m - 1);
}

Field interface_fluxes(SchemeKind scheme, const IsothermModel& model, double u, double alpha,
                       const Field& w, const InjectionSchedule& schedule, double t,
                       double weno_epsilon) {
  Field c;
  inverse_columns(model, w, c);
  Field out;
  const FluxSettings settings{scheme, u, alpha, weno_epsilon};
  interface_fluxes(settings, model, w, c, inflow_concentration(model, schedule, t), out);
  return out;
}

}  // namespace edchrom
