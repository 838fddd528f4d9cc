#pragma once

// Linear subspaces of GF(q)^n in canonical RREF form, their enumeration, and
// membership of a tensor in a sum of "structured" subspaces S_P (x) V_{P^c}.
//
// Dual spaces are identified with primal ones through the dot pairing, so the
// annihilator of a subspace is again a subspace of GF(q)^n.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "tenrank/errors.hpp"
#include "tenrank/gf.hpp"
#include "tenrank/linalg.hpp"
#include "tenrank/tensor.hpp"

namespace tenrank {

class Subspace {
 public:
  Subspace() = default;
  /// Span of the rows of `gens`, brought to RREF.
  explicit Subspace(Matrix gens) : basis_(std::move(gens)) { pivots_ = basis_.rref_in_place(); }

  static Subspace zero(const Field& f, std::size_t n) { return Subspace(Matrix(f, 0, n)); }
  static Subspace full(const Field& f, std::size_t n) { return Subspace(Matrix::identity(f, n)); }

  const Field& field() const { return basis_.field(); }
  std::size_t ambient_dim() const { return basis_.cols(); }
  std::size_t dim() const { return basis_.rows(); }
  std::size_t codim() const { return ambient_dim() - dim(); }
  const Matrix& basis() const { return basis_; }
  const std::vector<std::size_t>& pivots() const { return pivots_; }

  bool contains(std::span<const FieldElem> v) const {
    if (v.size() != ambient_dim()) throw argument_error("vector length does not match ambient dimension");
    // reduce v against the RREF rows
    const Field& f = field();
    std::vector<FieldElem> r(v.begin(), v.end());
    for (std::size_t i = 0; i < pivots_.size(); ++i) {
      const FieldElem c = r[pivots_[i]];
      if (c == Field::zero()) continue;
      const FieldElem nc = f.neg(c);
      for (std::size_t j = 0; j < r.size(); ++j) r[j] = f.add(r[j], f.mul(nc, basis_(i, j)));
    }
    for (const auto e : r)
      if (e != Field::zero()) return false;
    return true;
  }

  bool contains(const Subspace& o) const {
    for (std::size_t i = 0; i < o.dim(); ++i)
      if (!contains(o.basis_.row(i))) return false;
    return true;
  }

  friend bool operator==(const Subspace& a, const Subspace& b) { return a.basis_ == b.basis_; }

 private:
  Matrix basis_;
  std::vector<std::size_t> pivots_;
};

/// Canonical RREF basis of the span of `vectors` in GF(q)^n.
inline Subspace rref(const Field& f, std::size_t n, const std::vector<std::vector<FieldElem>>& vectors) {
  Matrix m(f, 0, n);
  for (const auto& v : vectors) m.append_row(v);
  return Subspace(std::move(m));
}

/// {x : <x, s> = 0 for all s in S} under the dot pairing.
inline Subspace annihilator(const Subspace& s) { return Subspace(null_space(s.basis())); }

/// Number of dim-k subspaces of GF(q)^n.
inline std::uint64_t gaussian_binomial(std::size_t n, std::size_t k, std::uint64_t q) {
  if (k > n) return 0;
  // prod_{i<k} (q^{n-i} - 1) / (q^{i+1} - 1), accumulated as an exact ratio
  unsigned __int128 num = 1, den = 1;
  auto qpow = [q](std::size_t e) {
    unsigned __int128 r = 1;
    for (std::size_t i = 0; i < e; ++i) r *= q;
    return r;
  };
  for (std::size_t i = 0; i < k; ++i) {
    num *= qpow(n - i) - 1;
    den *= qpow(i + 1) - 1;
  }
  return static_cast<std::uint64_t>(num / den);
}

struct EnumerationGuard {
  std::size_t max_n = 6;
  std::uint64_t max_points = 4096;  // q^n
};

inline void check_enumeration_guard(std::size_t n, const Field& f, const EnumerationGuard& g = {}) {
  std::uint64_t pts = 1;
  for (std::size_t i = 0; i < n && pts <= g.max_points; ++i) pts *= f.q();
  if (n > g.max_n || pts > g.max_points)
    throw guard_error("subspace enumeration of " + f.name() + "^" + std::to_string(n) +
                      " exceeds guard (n <= " + std::to_string(g.max_n) + ", q^n <= " +
                      std::to_string(g.max_points) + ")");
}

/// Visits every subspace of the given dimension exactly once, in pivot-pattern
/// order: pivot column sets lexicographically, then free entries with the first
/// free entry varying fastest. Stops early if `visit` returns false.
inline bool for_each_subspace_of_dim(std::size_t n, const Field& f, std::size_t dim,
                                     const std::function<bool(const Subspace&)>& visit) {
  if (dim > n) return true;
  std::vector<std::size_t> piv(dim);
  for (std::size_t i = 0; i < dim; ++i) piv[i] = i;
  const auto q = static_cast<std::uint32_t>(f.q());
  while (true) {
    // free slots: (row i, column c) with c > piv[i] and c not a pivot
    std::vector<bool> is_piv(n, false);
    for (auto c : piv) is_piv[c] = true;
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t c = piv[i] + 1; c < n; ++c)
        if (!is_piv[c]) slots.emplace_back(i, c);
    std::vector<std::uint32_t> digits(slots.size(), 0);
    while (true) {
      Matrix b(f, dim, n);
      for (std::size_t i = 0; i < dim; ++i) b(i, piv[i]) = Field::one();
      for (std::size_t s = 0; s < slots.size(); ++s) b(slots[s].first, slots[s].second) = FieldElem{digits[s]};
      if (!visit(Subspace(std::move(b)))) return false;
      std::size_t s = 0;
      while (s < digits.size() && ++digits[s] == q) digits[s++] = 0;
      if (s == digits.size()) break;
    }
    // next combination of pivot columns
    std::size_t i = dim;
    while (i > 0 && piv[i - 1] == n - dim + i - 1) --i;
    if (i == 0) break;
    ++piv[i - 1];
    for (std::size_t j = i; j < dim; ++j) piv[j] = piv[j - 1] + 1;
  }
  return true;
}

/// All subspaces of GF(q)^n (or only those of dimension `dim`), each exactly once.
inline std::vector<Subspace> enumerate_subspaces(std::size_t n, const Field& f, std::optional<std::size_t> dim = {},
                                                 const EnumerationGuard& guard = {}) {
  check_enumeration_guard(n, f, guard);
  std::vector<Subspace> out;
  auto push = [&](const Subspace& s) {
    out.push_back(s);
    return true;
  };
  if (dim) {
    for_each_subspace_of_dim(n, f, *dim, push);
  } else {
    for (std::size_t r = 0; r <= n; ++r) for_each_subspace_of_dim(n, f, r, push);
  }
  return out;
}

/// A set of modes, as a bit mask over mode indices.
using ModeMask = std::uint32_t;

inline std::vector<std::size_t> mask_modes(ModeMask m, std::size_t d) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d; ++i)
    if (m >> i & 1) out.push_back(i);
  return out;
}

inline std::size_t mask_product(const Shape& shape, ModeMask m) {
  std::size_t p = 1;
  for (std::size_t i = 0; i < shape.size(); ++i)
    if (m >> i & 1) p *= shape[i];
  return p;
}

/// Splits a flat index into (row-major index over the modes in `mask`, row-major index over the rest).
inline std::pair<std::size_t, std::size_t> split_index(const Shape& shape, ModeMask mask, std::size_t flat) {
  std::size_t a = 0, b = 0, sa = 1, sb = 1;
  for (std::size_t i = shape.size(); i-- > 0;) {
    const std::size_t c = flat % shape[i];
    flat /= shape[i];
    if (mask >> i & 1) {
      a += c * sa;
      sa *= shape[i];
    } else {
      b += c * sb;
      sb *= shape[i];
    }
  }
  return {a, b};
}

/// a (x) b with a on the modes of `mask` and b on the complement, as a full tensor.
inline Tensor assemble_product(const Field& f, const Shape& shape, ModeMask mask, std::span<const FieldElem> a,
                               std::span<const FieldElem> b) {
  if (a.size() != mask_product(shape, mask) || a.size() * b.size() != shape_size(shape))
    throw argument_error("factor sizes do not match the mode split");
  Tensor t(f, shape);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    const auto [i, j] = split_index(shape, mask, flat);
    if (a[i] != Field::zero() && b[j] != Field::zero()) t[flat] = f.mul(a[i], b[j]);
  }
  return t;
}

/// S_P together with the set of modes P it lives on.
struct SlicePart {
  ModeMask modes;
  Subspace space;
};

/// Rows: every a (x) e_c with a in the basis of some S_P and e_c a unit tensor on the complement of P.
inline Matrix slice_sum_generators(const Field& f, const Shape& shape, std::span<const SlicePart> parts) {
  const std::size_t total = shape_size(shape);
  Matrix g(f, 0, total);
  std::vector<FieldElem> row(total);
  for (const auto& part : parts) {
    const std::size_t np = mask_product(shape, part.modes);
    if (part.space.ambient_dim() != np)
      throw argument_error("subspace ambient dimension " + std::to_string(part.space.ambient_dim()) +
                           " does not match the flattened size " + std::to_string(np) + " of its modes");
    const std::size_t nc = total / np;
    for (std::size_t r = 0; r < part.space.dim(); ++r) {
      const auto a = part.space.basis().row(r);
      for (std::size_t c = 0; c < nc; ++c) {
        std::fill(row.begin(), row.end(), Field::zero());
        for (std::size_t flat = 0; flat < total; ++flat) {
          const auto [i, j] = split_index(shape, part.modes, flat);
          if (j == c) row[flat] = a[i];
        }
        g.append_row(row);
      }
    }
  }
  return g;
}

/// Is T in sum_P S_P (x) V_{P^c}? One rank comparison on the generator matrix with and without T.
inline bool member_of_slice_sum(const Tensor& t, std::span<const SlicePart> parts) {
  for (const auto& p : parts)
    if (p.modes == 0 || p.modes >> t.order() != 0) throw argument_error("mode subset out of range");
  Matrix g = slice_sum_generators(t.field(), t.shape(), parts);
  const std::size_t r = rank(g);
  g.append_row(t.entries());
  return rank(std::move(g)) == r;
}

/// A linear span of tensors of a common shape, given by independent basis tensors.
class TensorSubspace {
 public:
  TensorSubspace(Field f, Shape shape, std::vector<Tensor> basis)
      : field_(std::move(f)), shape_(std::move(shape)), basis_(std::move(basis)) {
    Matrix m(field_, 0, shape_size(shape_));
    for (const auto& t : basis_) {
      if (!(t.field() == field_) || t.shape() != shape_) throw argument_error("basis tensor has the wrong field or shape");
      m.append_row(t.entries());
    }
    if (rank(m) != basis_.size()) throw argument_error("basis tensors are linearly dependent");
  }

  const Field& field() const { return field_; }
  const Shape& shape() const { return shape_; }
  std::size_t order() const { return shape_.size(); }
  std::size_t dim() const { return basis_.size(); }
  const std::vector<Tensor>& basis() const { return basis_; }

  /// sum_i c_i basis_i
  Tensor combination(std::span<const FieldElem> c) const {
    if (c.size() != basis_.size()) throw argument_error("coefficient count does not match dimension");
    Tensor t(field_, shape_);
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c[i] != Field::zero()) t += basis_[i].scaled(c[i]);
    return t;
  }

 private:
  Field field_;
  Shape shape_;
  std::vector<Tensor> basis_;
};

}  // namespace tenrank
