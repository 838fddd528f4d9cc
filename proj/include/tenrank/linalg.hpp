#pragma once

// Dense matrices over GF(q) and exact Gaussian elimination.

#include <cstddef>
#include <optional>
#include <vector>

#include "tenrank/errors.hpp"
#include "tenrank/gf.hpp"

namespace tenrank {

class Matrix {
 public:
  Matrix() = default;
  Matrix(Field f, std::size_t rows, std::size_t cols)
      : field_(std::move(f)), rows_(rows), cols_(cols), data_(rows * cols, Field::zero()) {}
  Matrix(Field f, std::size_t rows, std::size_t cols, std::vector<FieldElem> data)
      : field_(std::move(f)), rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw argument_error("matrix data size does not match its shape");
  }

  static Matrix identity(Field f, std::size_t n) {
    Matrix m(std::move(f), n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Field::one();
    return m;
  }

  const Field& field() const { return field_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<FieldElem>& data() const { return data_; }

  FieldElem& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  FieldElem operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<FieldElem> row(std::size_t r) const {
    return {data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
            data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)};
  }

  void append_row(std::span<const FieldElem> r) {
    if (r.size() != cols_) throw argument_error("row length mismatch");
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
  }

  Matrix transpose() const {
    Matrix t(field_, cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw argument_error("matrix product shape mismatch");
    if (!(a.field_ == b.field_)) throw argument_error("matrix product over different fields");
    Matrix c(a.field_, a.rows_, b.cols_);
    const Field& f = a.field_;
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const FieldElem aik = a(i, k);
        if (aik == Field::zero()) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) = f.add(c(i, j), f.mul(aik, b(k, j)));
      }
    return c;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.field_ == b.field_ && a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  bool is_zero() const {
    for (const auto e : data_)
      if (e != Field::zero()) return false;
    return true;
  }

  /// Reduces in place to reduced row echelon form and drops zero rows. Returns pivot columns.
  std::vector<std::size_t> rref_in_place() {
    const Field& f = field_;
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols_ && r < rows_; ++c) {
      std::size_t piv = r;
      while (piv < rows_ && (*this)(piv, c) == Field::zero()) ++piv;
      if (piv == rows_) continue;
      if (piv != r)
        for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(piv, j), (*this)(r, j));
      const FieldElem s = f.inv((*this)(r, c));
      for (std::size_t j = c; j < cols_; ++j) (*this)(r, j) = f.mul((*this)(r, j), s);
      for (std::size_t i = 0; i < rows_; ++i) {
        if (i == r) continue;
        const FieldElem factor = (*this)(i, c);
        if (factor == Field::zero()) continue;
        const FieldElem nf = f.neg(factor);
        for (std::size_t j = c; j < cols_; ++j) (*this)(i, j) = f.add((*this)(i, j), f.mul(nf, (*this)(r, j)));
      }
      pivots.push_back(c);
      ++r;
    }
    rows_ = r;
    data_.resize(rows_ * cols_);
    return pivots;
  }

 private:
  Field field_;
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<FieldElem> data_;
};

inline std::size_t rank(Matrix m) { return m.rref_in_place().size(); }

/// Basis of {x : M x = 0}, as rows, in canonical RREF.
inline Matrix null_space(const Matrix& m) {
  Matrix r = m;
  const auto pivots = r.rref_in_place();
  const Field& f = m.field();
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto c : pivots) is_pivot[c] = true;
  Matrix basis(f, 0, m.cols());
  for (std::size_t free = 0; free < m.cols(); ++free) {
    if (is_pivot[free]) continue;
    std::vector<FieldElem> v(m.cols(), Field::zero());
    v[free] = Field::one();
    for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = f.neg(r(i, free));
    basis.append_row(v);
  }
  basis.rref_in_place();
  return basis;
}

/// Finds x with x^T A = b (b a combination of the rows of A), or nullopt.
inline std::optional<std::vector<FieldElem>> solve_row_combination(const Matrix& a, std::span<const FieldElem> b) {
  if (b.size() != a.cols()) throw argument_error("right-hand side length mismatch");
  const Field& f = a.field();
  // Eliminate on the augmented system [A^T | b]: unknowns are the rows of A.
  const std::size_t n = a.rows(), m = a.cols();
  Matrix aug(f, m, n + 1);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) aug(j, i) = a(i, j);
    aug(j, n) = b[j];
  }
  const auto pivots = aug.rref_in_place();
  if (!pivots.empty() && pivots.back() == n) return std::nullopt;
  std::vector<FieldElem> x(n, Field::zero());
  for (std::size_t i = 0; i < pivots.size(); ++i) x[pivots[i]] = aug(i, n);
  return x;
}

/// Finds X with X * A = B, or nullopt. Rows are solved independently.
inline std::optional<Matrix> solve_left(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw argument_error("solve_left shape mismatch");
  Matrix x(a.field(), 0, a.rows());
  for (std::size_t r = 0; r < b.rows(); ++r) {
    const auto row = b.row(r);
    auto sol = solve_row_combination(a, row);
    if (!sol) return std::nullopt;
    x.append_row(*sol);
  }
  return x;
}

/// Inverse of a square matrix; throws if singular.
inline Matrix inverse(const Matrix& a) {
  if (a.rows() != a.cols()) throw argument_error("inverse of a non-square matrix");
  auto x = solve_left(a, Matrix::identity(a.field(), a.rows()));
  if (!x) throw argument_error("matrix is singular");
  return *x;
}

}  // namespace tenrank
