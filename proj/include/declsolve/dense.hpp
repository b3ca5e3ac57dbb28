#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace declsolve {

/// Row-major dense 64-bit matrix. Vectors are stored as `n x 1`, transposed
/// vectors as `1 x n`, scalars as `1 x 1`. What a value *means* is decided by
/// the expression's shape; the storage only carries the extents.
class Dense {
 public:
  Dense() = default;
  Dense(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Dense(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Dense scalar(double v) { return Dense(1, 1, v); }
  static Dense column(std::vector<double> v);
  static Dense column(std::initializer_list<double> v) { return column(std::vector<double>(v)); }
  static Dense from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Dense identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  /// Value of a 1x1 entry.
  double value() const { return data_.at(0); }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  const std::vector<double>& storage() const noexcept { return data_; }

  Dense transposed() const;
  bool all_finite() const;

  friend bool operator==(const Dense& a, const Dense& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// LU factorization with partial pivoting of a square matrix.
class LuDecomposition {
 public:
  explicit LuDecomposition(const Dense& a);

  bool singular() const noexcept { return singular_; }
  double determinant() const;
  /// Solves A x = b in place for every column of `b`.
  void solve_in_place(Dense& b) const;
  Dense inverse() const;

 private:
  std::size_t n_ = 0;
  Dense lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
  bool singular_ = false;
};

}  // namespace declsolve
