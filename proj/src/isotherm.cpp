#include "edchrom/isotherm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace edchrom {

TothPhi::TothPhi(double nu) : nu_(nu), langmuir_(nu == 1.0) {
  if (!(nu > 0.0 && nu <= 1.0)) throw std::domain_error("Toth nu must lie in (0, 1]");
}

double TothPhi::value(double d) const {
  if (d < 0.0) throw std::domain_error("phi: argument must be nonnegative");
  if (langmuir_) return 1.0 + d;
  return std::pow(1.0 + std::pow(d, nu_), 1.0 / nu_);
}

double TothPhi::derivative(double d) const {
  if (langmuir_) {
    if (d < 0.0) throw std::domain_error("phi_prime: argument must be nonnegative");
    return 1.0;
  }
  if (!(d > 0.0)) throw std::domain_error("phi_prime: singular at d <= 0 for nu < 1");
  // (1 + d^nu)^(1/nu - 1) d^(nu - 1) = phi(d) / (1 + d^nu) * d^nu / d
  const double dn = std::pow(d, nu_);
  const double s = 1.0 + dn;
  return std::pow(s, 1.0 / nu_) / s * dn / d;
}

TothPhi::ValueAndSlope TothPhi::value_and_derivative(double d) const {
  if (langmuir_) {
    if (d < 0.0) throw std::domain_error("phi: argument must be nonnegative");
    return {1.0 + d, 1.0};
  }
  if (!(d > 0.0)) throw std::domain_error("phi_prime: singular at d <= 0 for nu < 1");
  const double dn = std::pow(d, nu_);
  const double s = 1.0 + dn;
  const double value = std::pow(s, 1.0 / nu_);
  return {value, value / s * dn / d};
}

double TothPhi::inverse(double p) const {
  if (p < 1.0 - 1e-12) throw std::domain_error("phi_inverse: argument must be >= 1");
  if (p <= 1.0) return 0.0;
  if (langmuir_) return p - 1.0;
  return std::pow(std::pow(p, nu_) - 1.0, 1.0 / nu_);
}

double TothPhi::quotient_derivative(double d) const {
  if (d < 0.0) throw std::domain_error("quotient_derivative: argument must be nonnegative");
  if (langmuir_) return 1.0 / ((1.0 + d) * (1.0 + d));
  return std::pow(1.0 + std::pow(d, nu_), -1.0 / nu_ - 1.0);
}

double TothPhi::inverse_slope(double d) const {
  if (d < 0.0) throw std::domain_error("inverse_slope: argument must be nonnegative");
  if (langmuir_) return 1.0;
  if (d == 0.0) return 0.0;
  const double dn = std::pow(d, nu_);
  const double s = 1.0 + dn;
  return s / std::pow(s, 1.0 / nu_) * d / dn;
}

namespace {

std::vector<double> eta_of(const IsothermParams& p) {
  std::vector<double> eta(p.a.size());
  const double ratio = (1.0 - p.porosity) / p.porosity;
  for (std::size_t i = 0; i < eta.size(); ++i) eta[i] = ratio * p.a[i];
  return eta;
}

}  // namespace

IsothermModel::IsothermModel(IsothermParams params)
    : params_(std::move(params)), phi_(params_.nu > 0.0 && params_.nu <= 1.0 ? params_.nu : 1.0) {
  const ValidationReport report = validate_model(params_);
  if (!report.ok) throw std::invalid_argument("invalid isotherm model: " + report.message);

  const std::vector<double> eta = eta_of(params_);
  const std::size_t n = eta.size();
  permutation_.resize(n);
  std::iota(permutation_.begin(), permutation_.end(), std::size_t{0});
  std::stable_sort(permutation_.begin(), permutation_.end(),
                   [&](std::size_t x, std::size_t y) { return eta[x] < eta[y]; });
  a_.resize(n);
  b_.resize(n);
  eta_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t u = permutation_[k];
    a_[k] = params_.a[u];
    b_[k] = params_.b[u];
    eta_[k] = eta[u];
    if (u != k) identity_order_ = false;
  }
}

void IsothermModel::to_internal(std::span<const double> user, std::span<double> internal) const {
  for (std::size_t k = 0; k < permutation_.size(); ++k) internal[k] = user[permutation_[k]];
}

void IsothermModel::to_user(std::span<const double> internal, std::span<double> user) const {
  for (std::size_t k = 0; k < permutation_.size(); ++k) user[permutation_[k]] = internal[k];
}

std::vector<double> IsothermModel::to_internal(std::span<const double> user) const {
  std::vector<double> out(size());
  to_internal(user, out);
  return out;
}

std::vector<double> IsothermModel::to_user(std::span<const double> internal) const {
  std::vector<double> out(size());
  to_user(internal, out);
  return out;
}

double IsothermModel::dot_b(std::span<const double> c) const {
  double d = 0.0;
  for (std::size_t i = 0; i < b_.size(); ++i) d += b_[i] * c[i];
  return d;
}

double phi(const IsothermModel& model, double d) { return model.phi_function().value(d); }

double phi_prime(const IsothermModel& model, double d) {
  return model.phi_function().derivative(d);
}

double phi_inverse(const IsothermModel& model, double p) {
  return model.phi_function().inverse(p);
}

std::vector<double> adsorption_q(const IsothermModel& model, std::span<const double> c) {
  const std::size_t n = model.size();
  if (c.size() != n) throw std::invalid_argument("adsorption_q: wrong number of components");
  for (double ci : c) {
    if (ci < 0.0) throw std::domain_error("adsorption_q: concentrations must be nonnegative");
  }
  const double p = model.phi_function().value(model.dot_b(c));
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = model.a()[i] * c[i] / p;
  return q;
}

ValidationReport validate_model(const IsothermParams& params) {
  ValidationReport report;
  auto fail = [&](std::string msg, std::optional<double> sample = std::nullopt) {
    report.ok = false;
    report.message = std::move(msg);
    report.offending_sample = sample;
    return report;
  };

  const std::size_t n = params.a.size();
  if (n == 0) return fail("at least one component is required");
  if (params.b.size() != n) return fail("a and b must have the same length");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(params.a[i] > 0.0)) return fail("a_" + std::to_string(i + 1) + " must be positive");
    if (!(params.b[i] > 0.0)) return fail("b_" + std::to_string(i + 1) + " must be positive");
  }
  if (!(params.porosity > 0.0 && params.porosity <= 1.0))
    return fail("porosity must lie in (0, 1]");
  if (!(params.nu > 0.0 && params.nu <= 1.0)) return fail("nu must lie in (0, 1]");

  std::vector<double> eta = eta_of(params);
  std::sort(eta.begin(), eta.end());
  if (!(eta.front() > 0.0)) return fail("eta must be positive (porosity 1 gives eta = 0)");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(eta[i] > eta[i - 1])) {
      std::ostringstream os;
      os << "eta values must be distinct (eta = " << eta[i] << " repeats)";
      return fail(os.str());
    }
  }

  const TothPhi phi(params.nu);
  constexpr int kSamples = 241;
  for (int k = 0; k < kSamples; ++k) {
    const double d = std::pow(10.0, -6.0 + 12.0 * k / (kSamples - 1));
    const double slope = phi.derivative(d);
    if (!(slope > 0.0)) return fail("phi' must be positive", d);
    if (!(phi.value(d) - d * slope > 0.0)) return fail("(d/phi(d))' must be positive", d);
  }
  return report;
}

ValidationReport validate_model(const IsothermModel& model) {
  return validate_model(model.params());
}

}  // namespace edchrom
