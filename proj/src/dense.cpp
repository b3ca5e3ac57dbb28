#include "declsolve/dense.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace declsolve {

Dense::Dense(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw std::invalid_argument("Dense: data size mismatch");
}

Dense Dense::column(std::vector<double> v) {
  const std::size_t n = v.size();
  return Dense(n, 1, std::move(v));
}

Dense Dense::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw std::invalid_argument("Dense::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Dense(r, c, std::move(data));
}

Dense Dense::identity(std::size_t n) {
  Dense out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

Dense Dense::transposed() const {
  Dense out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  }
  return out;
}

bool Dense::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

LuDecomposition::LuDecomposition(const Dense& a) : n_(a.rows()), lu_(a), perm_(a.rows()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("LU of non-square matrix");
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  for (std::size_t k = 0; k < n_; ++k) {
    std::size_t piv = k;
    double best = std::fabs(lu_(k, k));
    for (std::size_t i = k + 1; i < n_; ++i) {
      const double v = std::fabs(lu_(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) {
      singular_ = true;
      continue;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n_; ++j) std::swap(lu_(k, j), lu_(piv, j));
      std::swap(perm_[k], perm_[piv]);
      sign_ = -sign_;
    }
    const double inv_pivot = 1.0 / lu_(k, k);
    for (std::size_t i = k + 1; i < n_; ++i) {
      const double factor = lu_(i, k) * inv_pivot;
      lu_(i, k) = factor;
      if (factor == 0.0) continue;
      for (std::size_t j = k + 1; j < n_; ++j) lu_(i, j) -= factor * lu_(k, j);
    }
  }
}

double LuDecomposition::determinant() const {
  if (singular_) return 0.0;
  double det = static_cast<double>(sign_);
  for (std::size_t i = 0; i < n_; ++i) det *= lu_(i, i);
  return det;
}

void LuDecomposition::solve_in_place(Dense& b) const {
  const std::size_t cols = b.cols();
  Dense x(n_, cols);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t c = 0; c < cols; ++c) x(i, c) = b(perm_[i], c);
  }
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = x(i, c);
      for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x(j, c);
      x(i, c) = s;
    }
    for (std::size_t ii = n_; ii-- > 0;) {
      double s = x(ii, c);
      for (std::size_t j = ii + 1; j < n_; ++j) s -= lu_(ii, j) * x(j, c);
      x(ii, c) = s / lu_(ii, ii);
    }
  }
  b = std::move(x);
}

Dense LuDecomposition::inverse() const {
  Dense out = Dense::identity(n_);
  solve_in_place(out);
  return out;
}

}  // namespace declsolve
