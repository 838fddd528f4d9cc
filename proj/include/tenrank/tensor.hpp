#pragma once

// Dense tensors over GF(q).
//
// Conventions (every count downstream depends on them):
//  * entries are row-major, last index fastest;
//  * the Kronecker product uses the composite index a_i * m_i + b_i in mode i;
//  * the direct sum places T in the low block and S in the high block of every mode;
//  * the matrix multiplication tensor <n,n,n> is the trilinear form tr(ABC).
//
// Tensors handed to the rank routines have order >= 2. Orders 0 and 1 only
// arise as results of contraction.

#include <cstddef>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tenrank/errors.hpp"
#include "tenrank/gf.hpp"
#include "tenrank/linalg.hpp"

namespace tenrank {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + ")";
}

class Tensor {
 public:
  Tensor() = default;
  Tensor(Field f, Shape shape) : field_(std::move(f)), shape_(std::move(shape)), entries_(shape_size(shape_), Field::zero()) {}
  Tensor(Field f, Shape shape, std::vector<FieldElem> entries)
      : field_(std::move(f)), shape_(std::move(shape)), entries_(std::move(entries)) {
    if (entries_.size() != shape_size(shape_))
      throw argument_error("tensor has " + std::to_string(entries_.size()) + " entries but shape " + shape_string(shape_));
    for (const auto e : entries_)
      if (!field_.contains(e)) throw argument_error("tensor entry not in field " + field_.name());
  }

  const Field& field() const { return field_; }
  const Shape& shape() const { return shape_; }
  std::size_t order() const { return shape_.size(); }
  std::size_t dim(std::size_t mode) const { return shape_.at(mode); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<FieldElem>& entries() const { return entries_; }

  FieldElem operator[](std::size_t flat) const { return entries_[flat]; }
  FieldElem& operator[](std::size_t flat) { return entries_[flat]; }

  std::size_t flat_index(std::span<const std::size_t> idx) const {
    if (idx.size() != shape_.size()) throw argument_error("index arity does not match tensor order");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] >= shape_[i]) throw argument_error("tensor index out of range");
      flat = flat * shape_[i] + idx[i];
    }
    return flat;
  }

  std::vector<std::size_t> multi_index(std::size_t flat) const {
    std::vector<std::size_t> idx(shape_.size());
    for (std::size_t i = shape_.size(); i-- > 0;) {
      idx[i] = flat % shape_[i];
      flat /= shape_[i];
    }
    return idx;
  }

  FieldElem at(std::span<const std::size_t> idx) const { return entries_[flat_index(idx)]; }
  FieldElem at(std::initializer_list<std::size_t> idx) const {
    return at(std::span<const std::size_t>(idx.begin(), idx.size()));
  }
  void set(std::span<const std::size_t> idx, FieldElem v) { entries_[flat_index(idx)] = v; }
  void set(std::initializer_list<std::size_t> idx, FieldElem v) {
    set(std::span<const std::size_t>(idx.begin(), idx.size()), v);
  }

  bool is_zero() const {
    for (const auto e : entries_)
      if (e != Field::zero()) return false;
    return true;
  }

  std::size_t nonzeros() const {
    std::size_t n = 0;
    for (const auto e : entries_) n += e != Field::zero();
    return n;
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.field_ == b.field_ && a.shape_ == b.shape_ && a.entries_ == b.entries_;
  }

  Tensor& operator+=(const Tensor& o) {
    require_same(o);
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] = field_.add(entries_[i], o.entries_[i]);
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    require_same(o);
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] = field_.sub(entries_[i], o.entries_[i]);
    return *this;
  }
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }

  Tensor scaled(FieldElem s) const {
    Tensor r = *this;
    for (auto& e : r.entries_) e = field_.mul(e, s);
    return r;
  }

  void require_order_at_least_2() const {
    if (order() < 2) throw argument_error("tensors must have order >= 2");
  }

 private:
  void require_same(const Tensor& o) const {
    if (!(field_ == o.field_) || shape_ != o.shape_) throw argument_error("tensor shape or field mismatch");
  }

  Field field_;
  Shape shape_;
  std::vector<FieldElem> entries_;
};

/// Mode-i product: R[.., r, ..] = sum_c M[r, c] T[.., c, ..].
inline Tensor mode_product(const Tensor& t, std::size_t mode, const Matrix& m) {
  if (mode >= t.order()) throw argument_error("mode out of range");
  if (m.cols() != t.dim(mode))
    throw argument_error("matrix for mode " + std::to_string(mode) + " has " + std::to_string(m.cols()) +
                         " columns, tensor dimension is " + std::to_string(t.dim(mode)));
  if (!(m.field() == t.field())) throw argument_error("matrix and tensor over different fields");
  const Field& f = t.field();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < mode; ++i) outer *= t.dim(i);
  for (std::size_t i = mode + 1; i < t.order(); ++i) inner *= t.dim(i);
  const std::size_t n = t.dim(mode), r = m.rows();
  Shape out_shape = t.shape();
  out_shape[mode] = r;
  Tensor out(f, out_shape);
  for (std::size_t a = 0; a < outer; ++a)
    for (std::size_t c = 0; c < n; ++c) {
      const std::size_t src = (a * n + c) * inner;
      for (std::size_t row = 0; row < r; ++row) {
        const FieldElem coef = m(row, c);
        if (coef == Field::zero()) continue;
        const std::size_t dst = (a * r + row) * inner;
        for (std::size_t b = 0; b < inner; ++b) {
          const FieldElem v = t[src + b];
          if (v != Field::zero()) out[dst + b] = f.add(out[dst + b], f.mul(coef, v));
        }
      }
    }
  return out;
}

/// Contracts the listed modes with one functional (coordinate vector) each.
/// The result keeps the remaining modes in their original order; contracting
/// every mode yields an order-0 tensor holding the scalar.
inline Tensor contract(const Tensor& t, std::span<const std::size_t> modes,
                       std::span<const std::vector<FieldElem>> functionals) {
  if (modes.size() != functionals.size()) throw argument_error("one functional per contracted mode is required");
  std::vector<bool> used(t.order(), false);
  for (const auto m : modes) {
    if (m >= t.order()) throw argument_error("mode out of range");
    if (used[m]) throw argument_error("contracted modes must be distinct");
    used[m] = true;
  }
  Tensor cur = t;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (functionals[i].size() != t.dim(modes[i])) throw argument_error("functional length does not match mode dimension");
    cur = mode_product(cur, modes[i], Matrix(t.field(), 1, functionals[i].size(), functionals[i]));
  }
  Shape rest;
  for (std::size_t i = 0; i < t.order(); ++i)
    if (!used[i]) rest.push_back(t.dim(i));
  return Tensor(t.field(), rest, cur.entries());
}

/// T(f_1, ..., f_d) for functionals on every mode.
inline FieldElem evaluate(const Tensor& t, std::span<const std::vector<FieldElem>> functionals) {
  std::vector<std::size_t> modes(t.order());
  std::iota(modes.begin(), modes.end(), std::size_t{0});
  return contract(t, modes, functionals)[0];
}

inline Tensor kronecker(const Tensor& t, const Tensor& s) {
  if (t.order() != s.order()) throw argument_error("Kronecker product needs tensors of equal order");
  if (!(t.field() == s.field())) throw argument_error("Kronecker product over different fields");
  const std::size_t d = t.order();
  Shape shape(d);
  for (std::size_t i = 0; i < d; ++i) shape[i] = t.dim(i) * s.dim(i);
  Tensor out(t.field(), shape);
  const Field& f = t.field();
  std::vector<std::size_t> idx(d);
  for (std::size_t a = 0; a < t.size(); ++a) {
    if (t[a] == Field::zero()) continue;
    const auto ia = t.multi_index(a);
    for (std::size_t b = 0; b < s.size(); ++b) {
      if (s[b] == Field::zero()) continue;
      const auto ib = s.multi_index(b);
      for (std::size_t i = 0; i < d; ++i) idx[i] = ia[i] * s.dim(i) + ib[i];
      out.set(idx, f.mul(t[a], s[b]));
    }
  }
  return out;
}

inline Tensor direct_sum(const Tensor& t, const Tensor& s) {
  if (t.order() != s.order()) throw argument_error("direct sum needs tensors of equal order");
  if (!(t.field() == s.field())) throw argument_error("direct sum over different fields");
  const std::size_t d = t.order();
  Shape shape(d);
  for (std::size_t i = 0; i < d; ++i) shape[i] = t.dim(i) + s.dim(i);
  Tensor out(t.field(), shape);
  std::vector<std::size_t> idx(d);
  for (std::size_t a = 0; a < t.size(); ++a) {
    if (t[a] == Field::zero()) continue;
    out.set(t.multi_index(a), t[a]);
  }
  for (std::size_t b = 0; b < s.size(); ++b) {
    if (s[b] == Field::zero()) continue;
    const auto ib = s.multi_index(b);
    for (std::size_t i = 0; i < d; ++i) idx[i] = t.dim(i) + ib[i];
    out.set(idx, s[b]);
  }
  return out;
}

/// Id_n of order d: ones exactly on the diagonal.
inline Tensor identity_tensor(std::size_t n, std::size_t d, const Field& f) {
  if (d < 2) throw argument_error("identity tensor needs order >= 2");
  Tensor t(f, Shape(d, n));
  std::vector<std::size_t> idx(d);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(idx.begin(), idx.end(), i);
    t.set(idx, Field::one());
  }
  return t;
}

/// One matrix per mode; matrix i has shape m_i x n_i.
struct MatrixTuple {
  std::vector<Matrix> mats;
};

inline Tensor apply_matrices(const MatrixTuple& m, const Tensor& s) {
  if (m.mats.size() != s.order()) throw argument_error("matrix tuple length does not match tensor order");
  Tensor cur = s;
  for (std::size_t i = 0; i < m.mats.size(); ++i) cur = mode_product(cur, i, m.mats[i]);
  return cur;
}

/// Composition: apply_matrices(compose(m2, m1), S) == apply_matrices(m2, apply_matrices(m1, S)).
inline MatrixTuple compose(const MatrixTuple& outer, const MatrixTuple& inner) {
  if (outer.mats.size() != inner.mats.size()) throw argument_error("matrix tuples of different length");
  MatrixTuple out;
  for (std::size_t i = 0; i < outer.mats.size(); ++i) out.mats.push_back(outer.mats[i] * inner.mats[i]);
  return out;
}

/// Mode-k flattening: n_k rows, columns row-major over the remaining modes.
inline Matrix flatten(const Tensor& t, std::size_t mode) {
  if (mode >= t.order()) throw argument_error("mode out of range");
  const std::size_t n = t.dim(mode);
  const std::size_t cols = n == 0 ? 0 : t.size() / n;
  Matrix m(t.field(), n, cols);
  std::size_t inner = 1;
  for (std::size_t i = mode + 1; i < t.order(); ++i) inner *= t.dim(i);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    const std::size_t b = flat % inner;
    const std::size_t c = (flat / inner) % n;
    const std::size_t a = flat / (inner * n);
    m(c, a * inner + b) = t[flat];
  }
  return m;
}

/// Flattening along a set of modes: rows row-major over `modes` (in increasing
/// mode order), columns row-major over the complement.
inline Matrix flatten_modes(const Tensor& t, std::uint32_t mask) {
  const std::size_t d = t.order();
  std::size_t rows = 1, cols = 1;
  for (std::size_t i = 0; i < d; ++i) (mask >> i & 1 ? rows : cols) *= t.dim(i);
  Matrix m(t.field(), rows, cols);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    const auto idx = t.multi_index(flat);
    std::size_t r = 0, c = 0;
    for (std::size_t i = 0; i < d; ++i) {
      if (mask >> i & 1)
        r = r * t.dim(i) + idx[i];
      else
        c = c * t.dim(i) + idx[i];
    }
    m(r, c) = t[flat];
  }
  return m;
}

/// Tensor of the (d-1)-fold multiplication map of GF(q^l) over GF(q), in the basis 1, x, ..., x^{l-1}.
/// Entry (i_1, ..., i_{d-1}, j) is coordinate j of x^{i_1 + ... + i_{d-1}}.
inline Tensor mult_tensor(std::size_t d, const Field& base, unsigned l) {
  if (d < 2) throw argument_error("multiplication tensor needs order >= 2");
  const Extension ext(base, l);
  const std::size_t max_deg = (d - 1) * (l - 1);
  std::vector<std::vector<FieldElem>> power_coords(max_deg + 1);
  FieldElem pw = Field::one();
  for (auto& c : power_coords) {
    c = ext.coords(pw);
    pw = ext.ext().mul(pw, ext.ext().x());
  }
  Tensor t(base, Shape(d, l));
  for (std::size_t flat = 0; flat < t.size(); flat += l) {
    const auto idx = t.multi_index(flat);
    std::size_t deg = 0;
    for (std::size_t i = 0; i + 1 < d; ++i) deg += idx[i];
    for (std::size_t j = 0; j < l; ++j) t[flat + j] = power_coords[deg][j];
  }
  return t;
}

/// <n,n,n>: entry ((i,j),(k,l),(m,r)) is 1 iff j = k, l = m, r = i, so T(A,B,C) = tr(ABC).
inline Tensor matmul_tensor(std::size_t n, const Field& f) {
  if (n < 1) throw argument_error("matrix multiplication tensor needs n >= 1");
  Tensor t(f, Shape(3, n * n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < n; ++l) t.set({i * n + j, j * n + l, l * n + i}, Field::one());
  return t;
}

/// Coefficient tensor of multiplying d-1 polynomials of degree <= deg.
inline Tensor poly_mult_tensor(std::size_t d, std::size_t deg, const Field& f) {
  if (d < 2) throw argument_error("polynomial multiplication tensor needs order >= 2");
  Shape shape(d - 1, deg + 1);
  shape.push_back((d - 1) * deg + 1);
  Tensor t(f, shape);
  const std::size_t out = shape.back();
  for (std::size_t flat = 0; flat < t.size(); flat += out) {
    const auto idx = t.multi_index(flat);
    std::size_t s = 0;
    for (std::size_t i = 0; i + 1 < d; ++i) s += idx[i];
    t[flat + s] = Field::one();
  }
  return t;
}

struct BaseChange {
  Tensor native;  ///< the same entries, embedded into GF(q^l)
  Tensor kron;    ///< T boxtimes mult_tensor(d, GF(q), l), over GF(q)
};

inline Tensor embed_tensor(const Tensor& t, const Extension& ext) {
  if (!(t.field() == ext.base())) throw argument_error("tensor is not over the extension's base field");
  std::vector<FieldElem> e(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) e[i] = ext.embed(t[i]);
  return Tensor(ext.ext(), t.shape(), std::move(e));
}

inline BaseChange base_change(const Tensor& t, unsigned l) {
  t.require_order_at_least_2();
  const Extension ext(t.field(), l);
  return {embed_tensor(t, ext), kronecker(t, mult_tensor(t.order(), t.field(), l))};
}

template <class Rng>
Tensor random_tensor(const Field& f, const Shape& shape, Rng& rng) {
  std::uniform_int_distribution<std::uint64_t> dist(0, f.q() - 1);
  Tensor t(f, shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = FieldElem{static_cast<std::uint32_t>(dist(rng))};
  return t;
}

template <class Rng>
Matrix random_matrix(const Field& f, std::size_t rows, std::size_t cols, Rng& rng) {
  std::uniform_int_distribution<std::uint64_t> dist(0, f.q() - 1);
  Matrix m(f, rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = FieldElem{static_cast<std::uint32_t>(dist(rng))};
  return m;
}

}  // namespace tenrank
