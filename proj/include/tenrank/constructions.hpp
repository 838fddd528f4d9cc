#pragma once

// Explicit certificates built from polynomial interpolation: rank decompositions of
// polynomial and field-extension multiplication, a subrank witness for extension
// multiplication, the restriction chain between extensions, and the tensor T_W whose
// slice rank matches that of a subspace W.

#include <string>
#include <vector>

#include "tenrank/errors.hpp"
#include "tenrank/gf.hpp"
#include "tenrank/linalg.hpp"
#include "tenrank/search.hpp"
#include "tenrank/subspace.hpp"
#include "tenrank/tensor.hpp"

namespace tenrank {

struct InterpDecomp {
  std::vector<FieldElem> points;  ///< a_1, ..., a_{N+1}
  DecompCert cert;                ///< N+1 rank-one terms summing to poly_mult_tensor(d, l-1, f)
};

/// Square Vandermonde matrix V(j, i) = a_j^i.
inline Matrix vandermonde(const Field& f, const std::vector<FieldElem>& pts, std::size_t cols) {
  Matrix v(f, pts.size(), cols);
  for (std::size_t j = 0; j < pts.size(); ++j) {
    FieldElem pw = Field::one();
    for (std::size_t i = 0; i < cols; ++i, pw = f.mul(pw, pts[j])) v(j, i) = pw;
  }
  return v;
}

/// The first n field elements in enumeration order.
inline std::vector<FieldElem> interpolation_points(const Field& f, std::size_t n, const char* what) {
  if (f.q() < n)
    throw argument_error(std::string(what) + " needs " + std::to_string(n) + " distinct points but q = " + std::to_string(f.q()));
  auto all = f.elements();
  return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n)};
}

/// Rank decomposition of multiplying d-1 polynomials of degree < l by evaluation at N+1 points
/// and interpolation, N = (d-1)(l-1). The output vector of term j is column j of V^{-1}.
inline InterpDecomp interp_decomp(std::size_t d, std::size_t l, const Field& f) {
  if (d < 2 || l < 1) throw argument_error("interpolation needs d >= 2 and l >= 1");
  const std::size_t n = (d - 1) * (l - 1);
  const auto pts = interpolation_points(f, n + 1, "interpolation");
  const Matrix vinv = inverse(vandermonde(f, pts, n + 1));
  const Matrix ev = vandermonde(f, pts, l);
  const Tensor target = poly_mult_tensor(d, l - 1, f);
  InterpDecomp out{pts, {DecompKind::cp, f, target.shape(), {}}};
  for (std::size_t j = 0; j <= n; ++j) {
    std::vector<std::vector<FieldElem>> factors(d - 1, ev.row(j));
    std::vector<FieldElem> last(n + 1);
    for (std::size_t i = 0; i <= n; ++i) last[i] = vinv(i, j);
    factors.push_back(std::move(last));
    out.cert.terms.push_back(detail::cp_term(f, target.shape(), std::move(factors)));
  }
  if (!out.cert.verify(target)) throw verification_error("interpolation decomposition failed reconstruction");
  return out;
}

/// R(j, t) = coordinate j of x^t in GF(q^l), for t < cols.
inline Matrix reduction_matrix(const Extension& ext, std::size_t cols) {
  Matrix r(ext.base(), ext.degree(), cols);
  FieldElem pw = Field::one();
  for (std::size_t t = 0; t < cols; ++t, pw = ext.ext().mul(pw, ext.ext().x())) {
    const auto c = ext.coords(pw);
    for (unsigned j = 0; j < ext.degree(); ++j) r(j, t) = c[j];
  }
  return r;
}

/// Reduces the output of every term modulo the defining polynomial of GF(q^l): a decomposition
/// of mult_tensor(d, f, l) with the same number of terms.
inline DecompCert pushforward_to_extension(const InterpDecomp& dec, std::size_t d, std::size_t l, const Field& f) {
  const Extension ext(f, static_cast<unsigned>(l));
  const std::size_t n = (d - 1) * (l - 1);
  if (dec.cert.shape != poly_mult_tensor(d, l - 1, f).shape()) throw argument_error("decomposition does not match (d, l)");
  const Matrix r = reduction_matrix(ext, n + 1);
  const Tensor target = mult_tensor(d, f, static_cast<unsigned>(l));
  DecompCert out{DecompKind::cp, f, target.shape(), {}};
  for (const auto& term : dec.cert.terms) {
    auto factors = term.factors;
    std::vector<FieldElem> reduced(l, Field::zero());
    for (std::size_t j = 0; j < l; ++j)
      for (std::size_t t = 0; t <= n; ++t) reduced[j] = f.add(reduced[j], f.mul(r(j, t), factors.back()[t]));
    factors.back() = std::move(reduced);
    out.terms.push_back(detail::cp_term(f, target.shape(), std::move(factors)));
  }
  if (!out.verify(target)) throw verification_error("pushforward decomposition failed reconstruction");
  return out;
}

/// Id_{m+1} <= mult_tensor(d, f, l) with m = floor((l-1)/(d-1)). Input maps send e_r to the
/// Lagrange polynomial of point b_r; the output map evaluates at b_0, ..., b_m.
inline RestrictionCert subrank_cert_interpolation(std::size_t d, std::size_t l, const Field& f) {
  if (d < 2 || l < 1) throw argument_error("interpolation needs d >= 2 and l >= 1");
  const std::size_t m = (l - 1) / (d - 1);
  const auto pts = interpolation_points(f, m + 1, "subrank interpolation");
  const Matrix vinv = inverse(vandermonde(f, pts, m + 1));
  // row r holds the coefficients of the r-th Lagrange polynomial, padded to length l
  Matrix in(f, m + 1, l);
  for (std::size_t r = 0; r <= m; ++r)
    for (std::size_t i = 0; i <= m; ++i) in(r, i) = vinv(i, r);
  MatrixTuple mt;
  for (std::size_t k = 0; k + 1 < d; ++k) mt.mats.push_back(in);
  mt.mats.push_back(vandermonde(f, pts, l));
  RestrictionCert cert{mt, mult_tensor(d, f, static_cast<unsigned>(l)), identity_tensor(m + 1, d, f)};
  if (!cert.verify()) throw verification_error("interpolation subrank certificate failed re-check");
  return cert;
}

/// T_W = sum_j T_j (x) sum_i e_{ij} (x) e_{ij} with two new modes of size m*n, where m = max n_i,
/// n = dim W, and e_{ij} has index j*m + i.
inline Tensor tw_tensor(const TensorSubspace& w) {
  if (w.dim() == 0) throw argument_error("T_W needs a nonzero subspace");
  const std::size_t m = *std::max_element(w.shape().begin(), w.shape().end());
  const std::size_t n = w.dim(), mn = m * n;
  Shape shape = w.shape();
  shape.push_back(mn);
  shape.push_back(mn);
  Tensor out(w.field(), shape);
  const std::size_t inner = mn * mn;
  for (std::size_t j = 0; j < n; ++j) {
    const Tensor& t = w.basis()[j];
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
      if (t[flat] == Field::zero()) continue;
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t e = j * m + i;
        out[flat * inner + e * mn + e] = t[flat];
      }
    }
  }
  return out;
}

struct PolyChain {
  RestrictionCert lower;  ///< mult_tensor(d, f, n) from poly_mult_tensor(d, n-1, f)
  RestrictionCert upper;  ///< poly_mult_tensor(d, n-1, f) from mult_tensor(d, f, l)
};

/// Restriction chain mult(GF(q^n)) <= poly-mult(deg n-1) <= mult(GF(q^l)), valid when
/// (l-1) >= (d-1)(n-1) so the polynomial product needs no reduction in GF(q^l).
inline PolyChain poly_monotonicity_check(std::size_t d, std::size_t n, std::size_t l, const Field& f) {
  if (d < 2 || n < 1 || l < 1) throw argument_error("chain needs d >= 2 and n, l >= 1");
  const std::size_t big_n = (d - 1) * (n - 1);
  if (l - 1 < big_n)
    throw argument_error("chain needs (l-1) >= (d-1)(n-1): " + std::to_string(l - 1) + " < " + std::to_string(big_n));
  const Tensor poly = poly_mult_tensor(d, n - 1, f);
  PolyChain out;

  MatrixTuple lo;
  for (std::size_t k = 0; k + 1 < d; ++k) lo.mats.push_back(Matrix::identity(f, n));
  lo.mats.push_back(reduction_matrix(Extension(f, static_cast<unsigned>(n)), big_n + 1));
  out.lower = {lo, poly, mult_tensor(d, f, static_cast<unsigned>(n))};

  MatrixTuple hi;
  Matrix pad(f, n, l);  // x^r -> x^r
  for (std::size_t r = 0; r < n; ++r) pad(r, r) = Field::one();
  Matrix proj(f, big_n + 1, l);  // first N+1 coordinates
  for (std::size_t t = 0; t <= big_n; ++t) proj(t, t) = Field::one();
  for (std::size_t k = 0; k + 1 < d; ++k) hi.mats.push_back(pad);
  hi.mats.push_back(proj);
  out.upper = {hi, mult_tensor(d, f, static_cast<unsigned>(l)), poly};

  if (!out.lower.verify() || !out.upper.verify()) throw verification_error("polynomial restriction chain failed re-check");
  return out;
}

}  // namespace tenrank
