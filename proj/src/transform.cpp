#include "edchrom/transform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace edchrom {

namespace {

constexpr int kMaxRootIterations = 200;

double positive_dot_b(const IsothermModel& model, std::span<const double> x) {
  double d = 0.0;
  const auto b = model.b();
  for (std::size_t i = 0; i < b.size(); ++i) d += b[i] * std::max(x[i], 0.0);
  return d;
}

// S_w(p) for the Toth family with p^nu reused between phi^{-1} and the
// derivative term c^{1-nu} / p^2 = c / ((p^nu - 1) p^2).
SValue evaluate_s(const IsothermModel& model, std::span<const double> w, double p) {
  const auto b = model.b();
  const auto eta = model.eta();
  double value = 0.0;
  double derivative = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double wi = std::max(w[i], 0.0);
    const double inv = 1.0 / (p + eta[i]);
    const double t = b[i] * wi * inv;
    value += t;
    derivative -= t * inv;
  }
  const TothPhi& phi = model.phi_function();
  const double p2 = p * p;
  if (phi.is_langmuir()) {
    value -= (p - 1.0) / p;
    derivative -= 1.0 / p2;
  } else if (p > 1.0) {
    const double pn_minus_1 = std::pow(p, phi.nu()) - 1.0;
    const double c = std::pow(pn_minus_1, 1.0 / phi.nu());
    value -= c / p;
    derivative -= c / (pn_minus_1 * p2);
  }
  return {value, derivative};
}

}  // namespace

void forward(const IsothermModel& model, std::span<const double> c, std::span<double> w) {
  const double p = model.phi_function().value(positive_dot_b(model, c));
  const auto eta = model.eta();
  for (std::size_t i = 0; i < eta.size(); ++i) w[i] = c[i] * (1.0 + eta[i] / p);
}

std::vector<double> forward(const IsothermModel& model, std::span<const double> c) {
  if (c.size() != model.size()) throw std::invalid_argument("forward: wrong number of components");
  std::vector<double> w(c.size());
  forward(model, c, w);
  return w;
}

SValue s_function(const IsothermModel& model, std::span<const double> w, double p) {
  if (w.size() != model.size()) throw std::invalid_argument("s_function: wrong number of components");
  if (!(p >= 1.0)) throw std::domain_error("s_function: p must be >= 1");
  return evaluate_s(model, w, p);
}

double solve_p(const IsothermModel& model, std::span<const double> w) {
  const double bw = positive_dot_b(model, w);
  if (bw == 0.0) return 1.0;

  double lo = 1.0;
  double hi = model.phi_function().value(bw);
  const double tol = 1e-13 * (1.0 + bw);

  double p = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxRootIterations; ++it) {
    const SValue s = evaluate_s(model, w, p);
    if (std::abs(s.value) <= tol) return p;
    // S is strictly decreasing: a positive value puts the root above p.
    if (s.value > 0.0) {
      lo = p;
    } else {
      hi = p;
    }
    double next = p - s.value / s.derivative;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - p) <= 1e-14 * std::max(1.0, p) || next == lo || next == hi) return next;
    p = next;
  }
  std::ostringstream os;
  os << "solve_p: no convergence after " << kMaxRootIterations << " iterations (b^T w = " << bw
     << ")";
  throw ConvergenceError(os.str());
}

void inverse(const IsothermModel& model, std::span<const double> w, std::span<double> c) {
  const double p = solve_p(model, w);
  const auto eta = model.eta();
  for (std::size_t i = 0; i < eta.size(); ++i) c[i] = p * w[i] / (p + eta[i]);
}

std::vector<double> inverse(const IsothermModel& model, std::span<const double> w) {
  if (w.size() != model.size()) throw std::invalid_argument("inverse: wrong number of components");
  std::vector<double> c(w.size());
  inverse(model, w, c);
  return c;
}

JacobianParts jacobian_parts(const IsothermModel& model, std::span<const double> c) {
  const std::size_t n = model.size();
  if (c.size() != n) throw std::invalid_argument("jacobian_parts: wrong number of components");
  for (double ci : c) {
    if (!(ci > 0.0)) throw std::domain_error("jacobian_parts: concentrations must be positive");
  }
  JacobianParts parts;
  parts.v.resize(n);
  parts.A.resize(n);
  parts.B.resize(n);
  parts.gamma.resize(n);
  parts.d = model.dot_b(c);
  const TothPhi& phi = model.phi_function();
  const double p = phi.value(parts.d);
  const double slope = phi.derivative(parts.d);
  const auto eta = model.eta();
  const auto b = model.b();
  for (std::size_t i = 0; i < n; ++i) {
    parts.v[i] = 1.0 + eta[i] / p;
    parts.A[i] = b[i] * slope;
    parts.B[i] = -c[i] * eta[i] / (p * p);
    parts.gamma[i] = parts.A[i] * parts.B[i];
  }
  return parts;
}

void forward_with_jacobian(const IsothermModel& model, std::span<const double> c,
                           std::span<double> w, std::span<double> jacobian) {
  const std::size_t n = model.size();
  const TothPhi& phi = model.phi_function();
  const double d = positive_dot_b(model, c);
  double p = 1.0;
  double slope = 0.0;
  if (d > 0.0 || phi.is_langmuir()) {
    const auto vs = phi.value_and_derivative(d);
    p = vs.value;
    slope = vs.slope;
  }
  const auto eta = model.eta();
  const auto b = model.b();
  const double inv_p = 1.0 / p;
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i] * (1.0 + eta[i] * inv_p);
  for (std::size_t j = 0; j < n; ++j) {
    // d(b^T c+)/dc_j vanishes on the negative side.
    const double aj = c[j] >= 0.0 ? b[j] * slope : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double bi = -c[i] * eta[i] * inv_p * inv_p;
      jacobian[j * n + i] = bi * aj + (i == j ? 1.0 + eta[i] * inv_p : 0.0);
    }
  }
}

void jacobian_dense(const IsothermModel& model, std::span<const double> c, std::span<double> out) {
  std::vector<double> w(model.size());
  forward_with_jacobian(model, c, w, out);
}

}  // namespace edchrom
