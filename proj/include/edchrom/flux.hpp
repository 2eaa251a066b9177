#pragma once

#include <array>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edchrom/field.hpp"
#include "edchrom/isotherm.hpp"
#include "edchrom/reconstruct.hpp"

namespace edchrom {

enum class SchemeKind { ChrUpw, CompUpw1, CompUpw5, CompGlf, ChrGlf, Muscl };

inline constexpr std::array<SchemeKind, 6> kAllSchemes = {
    SchemeKind::ChrUpw, SchemeKind::CompUpw1, SchemeKind::CompUpw5,
    SchemeKind::CompGlf, SchemeKind::ChrGlf,  SchemeKind::Muscl};

/// "CHR-UPW", "COMP-UPW1", ...
std::string_view scheme_name(SchemeKind scheme);

/// Throws std::invalid_argument listing the six valid names.
SchemeKind parse_scheme(std::string_view name);

/// True for the schemes that project onto local characteristic fields.
bool is_characteristic(SchemeKind scheme);

/// Piecewise-constant inlet concentrations. Intervals are half-open
/// [start, end); outside every interval the inlet concentration is zero.
/// Values are in user component order.
class InjectionSchedule {
 public:
  struct Interval {
    double start = 0.0;
    double end = std::numeric_limits<double>::infinity();
    std::vector<double> concentration;

    friend bool operator==(const Interval&, const Interval&) = default;
  };

  InjectionSchedule() = default;
  explicit InjectionSchedule(std::size_t components) : components_(components) {}

  /// Throws std::invalid_argument on overlap, negative values or a
  /// component-count mismatch.
  void add(double start, double end, std::vector<double> concentration);

  std::size_t components() const { return components_; }
  const std::vector<Interval>& intervals() const { return intervals_; }

  void evaluate(double t, std::span<double> out) const;
  std::vector<double> at(double t) const;

  /// Finite interval endpoints, sorted and unique.
  std::vector<double> breakpoints() const;

  friend bool operator==(const InjectionSchedule&, const InjectionSchedule&) = default;

 private:
  std::size_t components_ = 0;
  std::vector<Interval> intervals_;
};

/// Inlet concentration at time t in internal component order.
std::vector<double> inflow_concentration(const IsothermModel& model,
                                         const InjectionSchedule& schedule, double t);

/// f(w) = u C(w).
std::vector<double> physical_flux(const IsothermModel& model, double u, std::span<const double> w);

struct FluxSettings {
  SchemeKind scheme = SchemeKind::ChrUpw;
  double u = 0.2;
  double alpha = 0.2;  // global Lax-Friedrichs viscosity, >= max characteristic speed
  double weno_epsilon = kDefaultWenoEpsilon;
};

/// Numerical fluxes at the m + 1 interfaces.
///
/// w and c = C*(w) are N x m fields in internal order; inflow_c is the inlet
/// concentration (internal order). out(:, 0) is the Danckwerts inlet flux
/// u c_inj, out(:, m) the upwind outflow u c_m, and out(:, k), 0 < k < m, the
/// scheme's flux between cells k-1 and k. Stencils reaching past the ends use
/// two constant-extrapolation ghost cells per side.
void interface_fluxes(const FluxSettings& settings, const IsothermModel& model, const Field& w,
                      const Field& c, std::span<const double> inflow_c, Field& out);

/// Convenience overload computing C*(w) and the inlet value from a schedule.
Field interface_fluxes(SchemeKind scheme, const IsothermModel& model, double u, double alpha,
                       const Field& w, const InjectionSchedule& schedule, double t,
                       double weno_epsilon = kDefaultWenoEpsilon);

/// Column-wise inverse transform.
void inverse_columns(const IsothermModel& model, const Field& w, Field& c);
void forward_columns(const IsothermModel& model, const Field& c, Field& w);

}  // namespace edchrom
