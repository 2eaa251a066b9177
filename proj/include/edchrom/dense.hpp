#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace edchrom {

/// Small column-major square or rectangular matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  std::span<double> column(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> column(std::size_t j) const {
    return {data_.data() + j * rows_, rows_};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// In-place LU with partial pivoting on an n x n column-major block.
/// Throws std::runtime_error on an exactly singular pivot.
void lu_factor_inplace(std::span<double> a, std::size_t n, std::span<std::size_t> pivots);

/// Solves A x = b given the output of lu_factor_inplace; b is overwritten by x.
void lu_solve_inplace(std::span<const double> lu, std::size_t n,
                      std::span<const std::size_t> pivots, std::span<double> b);

/// Value-type wrapper around lu_factor_inplace.
class LuFactor {
 public:
  LuFactor() = default;
  explicit LuFactor(const DenseMatrix& a);

  std::size_t size() const { return n_; }
  void solve_inplace(std::span<double> b) const { lu_solve_inplace(lu_, n_, pivots_, b); }
  std::vector<double> solve(std::span<const double> b) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> lu_;
  std::vector<std::size_t> pivots_;
};

}  // namespace edchrom
