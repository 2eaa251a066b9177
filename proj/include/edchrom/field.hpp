#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace edchrom {

/// N x m grid of values stored cell-major: the N components of cell j are
/// contiguous, so a cell column is a span.
class Field {
 public:
  Field() = default;
  Field(std::size_t components, std::size_t cells, double value = 0.0)
      : components_(components), cells_(cells), data_(components * cells, value) {}

  std::size_t components() const { return components_; }
  std::size_t cells() const { return cells_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * components_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * components_ + i]; }

  std::span<double> column(std::size_t j) {
    return {data_.data() + j * components_, components_};
  }
  std::span<const double> column(std::size_t j) const {
    return {data_.data() + j * components_, components_};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const Field& other) const {
    return components_ == other.components_ && cells_ == other.cells_;
  }

  void fill(double value) { std::fill(data_.begin(), data_.end(), value); }

  friend bool operator==(const Field&, const Field&) = default;

 private:
  std::size_t components_ = 0;
  std::size_t cells_ = 0;
  std::vector<double> data_;
};

inline void require_same_shape(const Field& a, const Field& b, const char* what) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": field shape mismatch");
}

}  // namespace edchrom
