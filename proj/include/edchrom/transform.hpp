#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "edchrom/dense.hpp"
#include "edchrom/isotherm.hpp"

namespace edchrom {

/// Raised when an iterative solver exhausts its iteration budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// w = W(c), w_i = c_i (1 + eta_i / phi(b^T c)).
///
/// Negative entries (undershoots produced by schemes that are not
/// positivity preserving) are handled by the sign-preserving extension
/// W_i(c) = c_i (1 + eta_i / phi(b^T c+)), c+ = max(c, 0). On [0, inf)^N
/// this is exactly the isotherm map.
void forward(const IsothermModel& model, std::span<const double> c, std::span<double> w);
std::vector<double> forward(const IsothermModel& model, std::span<const double> c);

struct SValue {
  double value;
  double derivative;
};

/// S_w(p) = sum_i b_i w_i / (p + eta_i) - phi^{-1}(p) / p and its derivative.
SValue s_function(const IsothermModel& model, std::span<const double> w, double p);

/// Unique root of S_w in [1, phi(b^T w)] (bracketed Newton with bisection
/// fallback). Returns exactly 1 when b^T w+ = 0. Negative entries of w are
/// treated as zero, matching the extension used by forward().
double solve_p(const IsothermModel& model, std::span<const double> w);

/// c = C(w) = W^{-1}(w), c_i = p w_i / (p + eta_i), p = solve_p(w).
void inverse(const IsothermModel& model, std::span<const double> w, std::span<double> c);
std::vector<double> inverse(const IsothermModel& model, std::span<const double> w);

/// W'(c) = diag(v) + B A^T.
struct JacobianParts {
  std::vector<double> v;
  std::vector<double> A;
  std::vector<double> B;
  std::vector<double> gamma;  // A_i B_i
  double d = 0.0;             // b^T c
};

/// Requires c_i > 0 for every i (throws std::domain_error otherwise).
JacobianParts jacobian_parts(const IsothermModel& model, std::span<const double> c);

/// Dense W'(c) for any c, including zero and negative entries. Where the
/// isotherm is not differentiable (b^T c+ = 0 with nu < 1) the rank-one
/// term is dropped, which is the limit from the interior.
void jacobian_dense(const IsothermModel& model, std::span<const double> c, std::span<double> out);

/// forward() and jacobian_dense() sharing one phi evaluation.
void forward_with_jacobian(const IsothermModel& model, std::span<const double> c,
                           std::span<double> w, std::span<double> jacobian);

}  // namespace edchrom
