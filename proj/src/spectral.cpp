#include "edchrom/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace edchrom {

namespace {

constexpr int kMaxSecularIterations = 60;

void check_secular_preconditions(const JacobianParts& parts) {
  const std::size_t n = parts.v.size();
  if (n == 0 || parts.gamma.size() != n) throw std::invalid_argument("secular: empty or mismatched parts");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(parts.gamma[i] < 0.0)) throw std::domain_error("secular: gamma_i must be negative");
    if (i > 0 && !(parts.v[i] > parts.v[i - 1]))
      throw std::domain_error("secular: v must be strictly increasing");
  }
  if (!(parts.v[0] > 1.0)) throw std::domain_error("secular: v_1 must exceed 1");
  if (!(secular_function(parts, 1.0) > 0.0)) throw std::domain_error("secular: Q(1) must be positive");
}

// Root j of Q in its bracket. With origin pole o and lambda = v_o + tau,
// g(tau) = (v_o - lambda) Q(lambda) = -tau (1 + psi(tau)) + gamma_o,
// psi(tau) = sum_{k != o} gamma_k / (delta_k - tau), delta_k = v_k - v_o,
// is smooth at the origin pole; Newton on g is safeguarded by bisection on
// the sign of Q.
void solve_root(const JacobianParts& parts, std::size_t j, SecularSolution& out) {
  const auto& v = parts.v;
  const auto& gamma = parts.gamma;
  const std::size_t n = v.size();

  const double lower = j == 0 ? 1.0 : v[j - 1];
  const double upper = v[j];
  std::size_t origin = j;
  if (j > 0) {
    const double mid = 0.5 * (lower + upper);
    if (secular_function(parts, mid) <= 0.0) origin = j - 1;
  }
  const double vo = v[origin];

  double tau_lo = lower - vo;
  double tau_hi = upper - vo;

  constexpr double eps = std::numeric_limits<double>::epsilon();
  // g and a bound on its rounding error.
  auto evaluate = [&](double tau, double& g, double& dg, double& q, double& noise) {
    double psi = 0.0;
    double dpsi = 0.0;
    double psi_abs = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == origin) continue;
      const double gap = (v[k] - vo) - tau;
      const double t = gamma[k] / gap;
      psi += t;
      psi_abs += std::abs(t);
      dpsi += t / gap;
    }
    g = -tau * (1.0 + psi) + gamma[origin];
    dg = -(1.0 + psi) - tau * dpsi;
    q = 1.0 + psi + gamma[origin] / (-tau);
    noise = 2.0 * static_cast<double>(n + 2) * eps * (std::abs(tau) * (1.0 + psi_abs) + std::abs(gamma[origin]));
  };

  double tau = 0.5 * (tau_lo + tau_hi);
  for (int it = 0; it < kMaxSecularIterations; ++it) {
    double g, dg, q, noise;
    evaluate(tau, g, dg, q, noise);
    if (std::abs(g) <= noise) break;
    // Q decreases on the bracket: positive Q puts the root at larger lambda.
    if (q > 0.0) {
      tau_lo = tau;
    } else {
      tau_hi = tau;
    }
    double next = tau - g / dg;
    if (!(next > tau_lo && next < tau_hi)) next = 0.5 * (tau_lo + tau_hi);
    const double step = std::abs(next - tau);
    tau = next;
    const double scale = std::max(std::abs(tau), std::numeric_limits<double>::min());
    if (step <= 4.0 * eps * scale || tau == tau_lo || tau == tau_hi ||
        tau_hi - tau_lo <= 32.0 * eps * std::max(std::abs(tau_lo), std::abs(tau_hi))) {
      break;
    }
    if (it + 1 == kMaxSecularIterations) {
      std::ostringstream os;
      os << "secular root " << j << " did not converge";
      throw ConvergenceError(os.str());
    }
  }
  out.lambda[j] = vo + tau;
  out.origin[j] = origin;
  out.offset[j] = tau;
}

}  // namespace

double secular_function(const JacobianParts& parts, double lambda) {
  double q = 1.0;
  for (std::size_t k = 0; k < parts.v.size(); ++k) q += parts.gamma[k] / (parts.v[k] - lambda);
  return q;
}

SecularSolution solve_secular(const JacobianParts& parts) {
  check_secular_preconditions(parts);
  const std::size_t n = parts.v.size();
  SecularSolution sol;
  sol.lambda.resize(n);
  sol.origin.resize(n);
  sol.offset.resize(n);
  for (std::size_t j = 0; j < n; ++j) solve_root(parts, j, sol);
  return sol;
}

std::vector<double> secular_roots(const JacobianParts& parts) { return solve_secular(parts).lambda; }

double smallest_secular_root(const JacobianParts& parts) {
  check_secular_preconditions(parts);
  const std::size_t n = parts.v.size();
  SecularSolution sol;
  sol.lambda.resize(n);
  sol.origin.resize(n);
  sol.offset.resize(n);
  solve_root(parts, 0, sol);
  return sol.lambda[0];
}

namespace {

void normalize_column(std::span<double> col) {
  std::size_t imax = 0;
  for (std::size_t k = 1; k < col.size(); ++k) {
    if (std::abs(col[k]) > std::abs(col[imax])) imax = k;
  }
  const double scale = col[imax];
  if (scale == 0.0 || !std::isfinite(scale)) throw std::runtime_error("eigenvectors: singular column");
  for (double& x : col) x /= scale;
}

}  // namespace

DenseMatrix eigenvectors(const JacobianParts& parts, std::span<const double> lambda) {
  const std::size_t n = parts.v.size();
  DenseMatrix r(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const double gap = parts.v[k] - lambda[j];
      if (gap == 0.0) throw std::runtime_error("eigenvectors: eigenvalue coincides with a pole");
      r(k, j) = parts.B[k] / gap;
    }
    normalize_column(r.column(j));
  }
  return r;
}

DenseMatrix eigenvectors(const JacobianParts& parts, const SecularSolution& roots) {
  const std::size_t n = parts.v.size();
  DenseMatrix r(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const double gap = roots.gap(parts.v, k, j);
      if (gap == 0.0) throw std::runtime_error("eigenvectors: eigenvalue coincides with a pole");
      r(k, j) = parts.B[k] / gap;
    }
    normalize_column(r.column(j));
  }
  return r;
}

SpectralDecomp decompose_at_concentration(const IsothermModel& model, std::span<const double> c) {
  std::vector<double> clamped(c.begin(), c.end());
  for (double& x : clamped) x = std::max(x, kConcentrationFloor);
  SpectralDecomp out;
  out.parts = jacobian_parts(model, clamped);
  const SecularSolution roots = solve_secular(out.parts);
  out.lambda = roots.lambda;
  out.mu.resize(out.lambda.size());
  for (std::size_t j = 0; j < out.lambda.size(); ++j) out.mu[j] = 1.0 / out.lambda[j];
  out.R = eigenvectors(out.parts, roots);
  out.R_factor = LuFactor(out.R);
  return out;
}

SpectralDecomp decompose_at_interface(const IsothermModel& model, std::span<const double> w_left,
                                      std::span<const double> w_right) {
  const std::size_t n = model.size();
  if (w_left.size() != n || w_right.size() != n)
    throw std::invalid_argument("decompose_at_interface: wrong number of components");
  std::vector<double> mid(n);
  for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (w_left[i] + w_right[i]);
  std::vector<double> c(n);
  inverse(model, mid, c);
  return decompose_at_concentration(model, c);
}

void apply_R_inverse(const SpectralDecomp& decomp, std::span<const double> x, std::span<double> out) {
  std::copy(x.begin(), x.end(), out.begin());
  decomp.R_factor.solve_inplace(out);
}

void apply_R(const SpectralDecomp& decomp, std::span<const double> y, std::span<double> out) {
  decomp.R.multiply(y, out);
}

std::vector<double> apply_R_inverse(const SpectralDecomp& decomp, std::span<const double> x) {
  std::vector<double> out(x.size());
  apply_R_inverse(decomp, x, out);
  return out;
}

std::vector<double> apply_R(const SpectralDecomp& decomp, std::span<const double> y) {
  std::vector<double> out(y.size());
  apply_R(decomp, y, out);
  return out;
}

double spectral_radius_of_inverse_jacobian(const IsothermModel& model, std::span<const double> c) {
  std::vector<double> clamped(c.begin(), c.end());
  for (double& x : clamped) x = std::max(x, kConcentrationFloor);
  return 1.0 / smallest_secular_root(jacobian_parts(model, clamped));
}

}  // namespace edchrom
