#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "edchrom/dense.hpp"
#include "edchrom/isotherm.hpp"
#include "edchrom/transform.hpp"

namespace edchrom {

/// Concentrations below this floor are raised to it before the Jacobian is
/// formed, so that every gamma_i is strictly negative.
inline constexpr double kConcentrationFloor = 1e-12;

/// Roots of Q(lambda) = 1 + sum_j gamma_j / (v_j - lambda), one per bracket
/// (1, v_1), (v_1, v_2), ..., (v_{N-1}, v_N).
///
/// Each root is stored as lambda_j = v_{origin_j} + offset_j, with origin the
/// pole closest to the root, so that the gaps v_k - lambda_j can be formed
/// without cancellation.
struct SecularSolution {
  std::vector<double> lambda;
  std::vector<std::size_t> origin;
  std::vector<double> offset;

  /// v_k - lambda_j computed relative to the root's origin pole.
  double gap(std::span<const double> v, std::size_t k, std::size_t j) const {
    return (v[k] - v[origin[j]]) - offset[j];
  }
};

/// Q(lambda) for the given parts.
double secular_function(const JacobianParts& parts, double lambda);

/// Throws std::domain_error if v is not strictly increasing, some gamma_i is
/// not negative or Q(1) <= 0; ConvergenceError if a bracket fails to converge.
SecularSolution solve_secular(const JacobianParts& parts);
std::vector<double> secular_roots(const JacobianParts& parts);

/// Smallest root only (the largest eigenvalue of C'(w) is its reciprocal).
double smallest_secular_root(const JacobianParts& parts);

/// Columns (r_j)_k = B_k / (v_k - lambda_j), scaled to unit max-norm with the
/// largest-magnitude entry positive.
DenseMatrix eigenvectors(const JacobianParts& parts, std::span<const double> lambda);
DenseMatrix eigenvectors(const JacobianParts& parts, const SecularSolution& roots);

/// Eigen-structure of W'(c*) at an interface state.
struct SpectralDecomp {
  std::vector<double> lambda;  // eigenvalues of W'(c*), ascending
  std::vector<double> mu;      // 1 / lambda, eigenvalues of C'(w*), descending
  DenseMatrix R;               // right eigenvectors as columns
  LuFactor R_factor;
  JacobianParts parts;         // at the clamped c*
};

/// Decomposition of W'(c) at a concentration vector (clamped to the floor).
SpectralDecomp decompose_at_concentration(const IsothermModel& model, std::span<const double> c);

/// Decomposition at the midpoint state (w_left + w_right) / 2.
SpectralDecomp decompose_at_interface(const IsothermModel& model, std::span<const double> w_left,
                                      std::span<const double> w_right);

void apply_R_inverse(const SpectralDecomp& decomp, std::span<const double> x, std::span<double> out);
void apply_R(const SpectralDecomp& decomp, std::span<const double> y, std::span<double> out);
std::vector<double> apply_R_inverse(const SpectralDecomp& decomp, std::span<const double> x);
std::vector<double> apply_R(const SpectralDecomp& decomp, std::span<const double> y);

/// Largest eigenvalue of C'(w) where c = C(w) is given: 1 / lambda_1(c).
double spectral_radius_of_inverse_jacobian(const IsothermModel& model, std::span<const double> c);

}  // namespace edchrom
