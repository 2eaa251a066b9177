#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace edchrom {

/// Toth's phi(d) = (1 + d^nu)^(1/nu), 0 < nu <= 1. nu = 1 is Langmuir.
///
/// Any other phi family plugged into IsothermModel has to provide the same
/// members with the same meaning: continuous increasing bijection of
/// [0, inf) onto [1, inf) with phi' > 0 and (d / phi(d))' > 0.
class TothPhi {
 public:
  explicit TothPhi(double nu);

  double nu() const { return nu_; }
  bool is_langmuir() const { return langmuir_; }

  double value(double d) const;
  double derivative(double d) const;
  double inverse(double p) const;

  struct ValueAndSlope {
    double value;
    double slope;
  };
  /// phi(d) and phi'(d) with shared power evaluations (d > 0, or d = 0 for nu = 1).
  ValueAndSlope value_and_derivative(double d) const;

  /// (d / phi(d))' = (1 + d^nu)^(-1/nu - 1).
  double quotient_derivative(double d) const;

  /// 1 / phi'(d), continuous up to d = 0 (where it is 0 for nu < 1).
  double inverse_slope(double d) const;

 private:
  double nu_;
  bool langmuir_;
};

/// User-facing isotherm parameters, components in user order.
struct IsothermParams {
  std::vector<double> a;  // a_i = alpha_i b_i
  std::vector<double> b;
  double porosity = 0.5;
  double nu = 1.0;
};

/// Generalized Langmuir isotherm q_i(c) = a_i c_i / phi(b^T c).
///
/// Components are stored sorted by eta_i = (1 - eps)/eps * a_i ascending;
/// every numerical routine in this library works in that internal order.
/// permutation()[k] is the user index of internal component k.
class IsothermModel {
 public:
  /// Throws std::invalid_argument when validate_model(params) fails.
  explicit IsothermModel(IsothermParams params);

  std::size_t size() const { return a_.size(); }
  std::span<const double> a() const { return a_; }
  std::span<const double> b() const { return b_; }
  std::span<const double> eta() const { return eta_; }
  double porosity() const { return params_.porosity; }
  double nu() const { return params_.nu; }
  const TothPhi& phi_function() const { return phi_; }
  const IsothermParams& params() const { return params_; }

  std::span<const std::size_t> permutation() const { return permutation_; }
  bool is_identity_order() const { return identity_order_; }

  void to_internal(std::span<const double> user, std::span<double> internal) const;
  void to_user(std::span<const double> internal, std::span<double> user) const;
  std::vector<double> to_internal(std::span<const double> user) const;
  std::vector<double> to_user(std::span<const double> internal) const;

  /// b^T c
  double dot_b(std::span<const double> c) const;

 private:
  IsothermParams params_;
  TothPhi phi_;
  std::vector<double> a_, b_, eta_;
  std::vector<std::size_t> permutation_;
  bool identity_order_ = true;
};

double phi(const IsothermModel& model, double d);
double phi_prime(const IsothermModel& model, double d);
double phi_inverse(const IsothermModel& model, double p);

/// q(c) in internal component order.
std::vector<double> adsorption_q(const IsothermModel& model, std::span<const double> c);

struct ValidationReport {
  bool ok = true;
  std::string message;
  std::optional<double> offending_sample;
};

/// Checks parameter ranges, distinctness of eta and, on a log grid in
/// [1e-6, 1e6], phi' > 0 and phi - d phi' > 0. Never throws.
ValidationReport validate_model(const IsothermParams& params);
ValidationReport validate_model(const IsothermModel& model);

}  // namespace edchrom
