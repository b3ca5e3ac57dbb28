#include "declsolve/shape.hpp"

namespace declsolve {

Shape Shape::matrix(Dim rows, Dim cols) {
  if (rows == Dim::fixed(1) && cols == Dim::fixed(1)) return scalar();
  return Shape(Kind::kMatrix, rows, cols);
}

Shape Shape::transposed() const {
  if (!is_matrix()) return *this;
  return matrix(cols_, rows_);
}

std::string to_string(const Dim& d) {
  if (d.is_fixed()) return std::to_string(d.size());
  return "d" + std::to_string(d.id());
}

std::string to_string(const Shape& s) {
  switch (s.kind()) {
    case Shape::Kind::kUnknown: return "Unknown";
    case Shape::Kind::kScalar: return "Scalar";
    case Shape::Kind::kMatrix:
      if (s.is_column()) return "Vector(" + to_string(s.rows()) + ")";
      if (s.is_row()) return "RowVector(" + to_string(s.cols()) + ")";
      return "Matrix(" + to_string(s.rows()) + ", " + to_string(s.cols()) + ")";
  }
  return "Unknown";
}

std::optional<std::size_t> DimBinding::resolve(const Dim& d) const {
  if (d.is_fixed()) return d.size();
  auto it = sizes_.find(d.id());
  if (it == sizes_.end()) return std::nullopt;
  return it->second;
}

void DimBinding::bind(const Dim& d, std::size_t n, const std::string& context) {
  if (auto known = resolve(d)) {
    if (*known != n) {
      throw Error(ErrorKind::kDimension, context + ": dimension " + to_string(d) + " is " +
                                             std::to_string(*known) + " but data has " +
                                             std::to_string(n));
    }
    return;
  }
  sizes_.emplace(d.id(), n);
}

}  // namespace declsolve
