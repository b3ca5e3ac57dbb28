#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>

#include "declsolve/error.hpp"

namespace declsolve {

/// A matrix extent: either a concrete positive size or a named unknown that is
/// resolved when data is bound.
class Dim {
 public:
  static Dim fixed(std::size_t n) { return Dim(n, -1); }
  static Dim symbol(int id) { return Dim(0, id); }

  bool is_fixed() const noexcept { return symbol_ < 0; }
  std::size_t size() const noexcept { return size_; }
  int id() const noexcept { return symbol_; }

  friend bool operator==(const Dim&, const Dim&) = default;

 private:
  Dim(std::size_t n, int id) : size_(n), symbol_(id) {}
  std::size_t size_;
  int symbol_;
};

/// Scalar, or a rows x cols matrix. Vectors are `n x 1`, transposed vectors
/// `1 x n`. A product that yields `1 x 1` is reported as Scalar.
class Shape {
 public:
  enum class Kind { kUnknown, kScalar, kMatrix };

  Shape() = default;
  static Shape scalar() { return Shape(Kind::kScalar, Dim::fixed(1), Dim::fixed(1)); }
  static Shape matrix(Dim rows, Dim cols);
  static Shape vector(Dim rows) { return matrix(rows, Dim::fixed(1)); }
  static Shape row_vector(Dim cols) { return matrix(Dim::fixed(1), cols); }

  Kind kind() const noexcept { return kind_; }
  bool known() const noexcept { return kind_ != Kind::kUnknown; }
  bool is_scalar() const noexcept { return kind_ == Kind::kScalar; }
  bool is_matrix() const noexcept { return kind_ == Kind::kMatrix; }
  bool is_column() const noexcept { return is_matrix() && cols_ == Dim::fixed(1); }
  bool is_row() const noexcept { return is_matrix() && rows_ == Dim::fixed(1); }

  Dim rows() const noexcept { return rows_; }
  Dim cols() const noexcept { return cols_; }
  Shape transposed() const;

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  Shape(Kind k, Dim r, Dim c) : kind_(k), rows_(r), cols_(c) {}
  Kind kind_ = Kind::kUnknown;
  Dim rows_ = Dim::fixed(1);
  Dim cols_ = Dim::fixed(1);
};

std::string to_string(const Dim& d);
std::string to_string(const Shape& s);

/// Concrete sizes for symbolic dims, established when data is bound.
class DimBinding {
 public:
  /// Size of `d`, or nullopt if it is symbolic and unbound.
  std::optional<std::size_t> resolve(const Dim& d) const;
  /// Records `d == n`; throws kDimension if `d` already resolves differently.
  void bind(const Dim& d, std::size_t n, const std::string& context);
  bool empty() const noexcept { return sizes_.empty(); }

 private:
  std::map<int, std::size_t> sizes_;
};

}  // namespace declsolve
