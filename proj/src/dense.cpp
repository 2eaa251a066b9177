#include "edchrom/dense.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace edchrom {

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void DenseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < rows_; ++i) y[i] = 0.0;
  for (std::size_t j = 0; j < cols_; ++j) {
    const double xj = x[j];
    const double* col = data_.data() + j * rows_;
    for (std::size_t i = 0; i < rows_; ++i) y[i] += col[i] * xj;
  }
}

void lu_factor_inplace(std::span<double> a, std::size_t n, std::span<std::size_t> pivots) {
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[j * n + i]; };
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(at(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(at(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    pivots[k] = p;
    if (best == 0.0 || !std::isfinite(best)) throw std::runtime_error("lu_factor: singular matrix");
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
    }
    const double inv = 1.0 / at(k, k);
    for (std::size_t i = k + 1; i < n; ++i) at(i, k) *= inv;
    for (std::size_t j = k + 1; j < n; ++j) {
      const double akj = at(k, j);
      if (akj == 0.0) continue;
      for (std::size_t i = k + 1; i < n; ++i) at(i, j) -= at(i, k) * akj;
    }
  }
}

void lu_solve_inplace(std::span<const double> lu, std::size_t n,
                      std::span<const std::size_t> pivots, std::span<double> b) {
  auto at = [&](std::size_t i, std::size_t j) { return lu[j * n + i]; };
  for (std::size_t k = 0; k < n; ++k) {
    if (pivots[k] != k) std::swap(b[k], b[pivots[k]]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double bj = b[j];
    for (std::size_t i = j + 1; i < n; ++i) b[i] -= at(i, j) * bj;
  }
  for (std::size_t jj = n; jj-- > 0;) {
    b[jj] /= at(jj, jj);
    const double bj = b[jj];
    for (std::size_t i = 0; i < jj; ++i) b[i] -= at(i, jj) * bj;
  }
}

LuFactor::LuFactor(const DenseMatrix& a)
    : n_(a.rows()), lu_(a.data().begin(), a.data().end()), pivots_(a.rows()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("LuFactor: matrix must be square");
  lu_factor_inplace(lu_, n_, pivots_);
}

std::vector<double> LuFactor::solve(std::span<const double> b) const {
  std::vector<double> x(b.begin(), b.end());
  solve_inplace(x);
  return x;
}

}  // namespace edchrom
