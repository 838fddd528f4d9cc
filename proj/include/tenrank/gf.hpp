#pragma once

// Exact arithmetic in GF(p^k).
//
// A field is GF(p)[x]/(m) where m is the lexicographically smallest monic
// irreducible polynomial of degree k, comparing coefficient tuples
// (c_0, c_1, ..., c_{k-1}) from the constant term upwards. Two fields built
// from the same (p, k) are therefore identical, and every output that depends
// on coordinates is reproducible.
//
// Elements are stored as their base-p code sum_i c_i p^i (c_0 is the lowest
// digit). The same code is the external encoding of an element.

#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tenrank/errors.hpp"

namespace tenrank {

/// An element of some GF(p^k), encoded as the integer sum_i c_i p^i.
struct FieldElem {
  std::uint32_t code = 0;
  friend constexpr auto operator<=>(const FieldElem&, const FieldElem&) = default;
};

namespace detail {

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

/// Polynomial over Z_p, coefficients low degree first.
using Poly = std::vector<std::uint64_t>;

inline void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

/// a mod m over Z_p; m must be monic.
inline Poly poly_mod(Poly a, const Poly& m, std::uint64_t p) {
  trim(a);
  const std::size_t dm = m.size() - 1;
  while (a.size() > dm) {
    const std::uint64_t c = a.back();
    const std::size_t shift = a.size() - 1 - dm;
    for (std::size_t i = 0; i <= dm; ++i) a[shift + i] = (a[shift + i] + (p - c) * m[i]) % p;
    trim(a);
  }
  return a;
}

/// Irreducibility of a monic polynomial by exhaustive search for monic divisors of degree <= deg/2.
inline bool is_irreducible(const Poly& m, std::uint64_t p) {
  const std::size_t deg = m.size() - 1;
  for (std::size_t dd = 1; dd <= deg / 2; ++dd) {
    Poly div(dd + 1, 0);
    div[dd] = 1;
    // odometer over the dd free coefficients
    while (true) {
      if (poly_mod(m, div, p).empty()) return false;
      std::size_t i = 0;
      while (i < dd && ++div[i] == p) div[i++] = 0;
      if (i == dd) break;
    }
  }
  return true;
}

}  // namespace detail

/// A finite field GF(p^k). Cheap to copy; all copies share immutable tables.
class Field {
 public:
  static constexpr std::uint64_t kTableLimit = 512;  // q at or below this gets q*q lookup tables
  static constexpr unsigned kMaxDegree = 12;
  static constexpr std::uint64_t kMaxOrder = std::uint64_t{1} << 30;

  Field() = default;

  /// Builds the canonical GF(p^k).
  static Field make(std::uint64_t p, unsigned k) {
    if (k < 1) throw argument_error("field degree must be >= 1");
    if (!detail::is_prime(p)) throw argument_error("field characteristic " + std::to_string(p) + " is not prime");
    if (k > kMaxDegree) throw argument_error("field degree above " + std::to_string(kMaxDegree) + " is unsupported");
    std::uint64_t q = 1;
    for (unsigned i = 0; i < k; ++i) {
      q *= p;
      if (q > kMaxOrder) throw argument_error("field order too large");
    }
    auto impl = std::make_shared<Impl>();
    impl->p = static_cast<std::uint32_t>(p);
    impl->k = k;
    impl->q = q;
    impl->modulus = find_modulus(p, k);
    impl->build_tables();
    Field f;
    f.impl_ = std::move(impl);
    return f;
  }

  bool valid() const { return impl_ != nullptr; }
  std::uint32_t p() const { return impl_->p; }
  unsigned k() const { return impl_->k; }
  std::uint64_t q() const { return impl_->q; }
  /// Modulus coefficients, low degree first, length k+1, monic.
  std::vector<std::uint32_t> modulus() const {
    return {impl_->modulus.begin(), impl_->modulus.end()};
  }

  friend bool operator==(const Field& a, const Field& b) {
    if (!a.impl_ || !b.impl_) return a.impl_ == b.impl_;
    return a.impl_->p == b.impl_->p && a.impl_->k == b.impl_->k;
  }

  static constexpr FieldElem zero() { return {0}; }
  static constexpr FieldElem one() { return {1}; }
  /// The class of x (a generator of the field over GF(p) when k >= 2).
  FieldElem x() const { return impl_->reduce({0, 1}); }

  bool contains(FieldElem a) const { return a.code < impl_->q; }

  FieldElem from_code(std::uint64_t code) const {
    if (code >= impl_->q) throw argument_error("element code " + std::to_string(code) + " out of range for field");
    return {static_cast<std::uint32_t>(code)};
  }

  FieldElem from_int(std::int64_t v) const {
    const auto pp = static_cast<std::int64_t>(impl_->p);
    return {static_cast<std::uint32_t>(((v % pp) + pp) % pp)};
  }

  FieldElem from_coeffs(std::span<const std::uint32_t> c) const {
    if (c.size() != impl_->k) throw argument_error("coefficient vector length must equal field degree");
    std::uint64_t code = 0;
    for (std::size_t i = c.size(); i-- > 0;) {
      if (c[i] >= impl_->p) throw argument_error("coefficient out of range");
      code = code * impl_->p + c[i];
    }
    return {static_cast<std::uint32_t>(code)};
  }

  std::vector<std::uint32_t> coeffs(FieldElem a) const {
    std::vector<std::uint32_t> c(impl_->k);
    std::uint32_t v = a.code;
    for (auto& ci : c) {
      ci = v % impl_->p;
      v /= impl_->p;
    }
    return c;
  }

  FieldElem add(FieldElem a, FieldElem b) const {
    const Impl& f = *impl_;
    if (f.p == 2) return {a.code ^ b.code};
    if (f.k == 1) return {static_cast<std::uint32_t>((std::uint64_t{a.code} + b.code) % f.p)};
    if (!f.add_tab.empty()) return {f.add_tab[a.code * f.q + b.code]};
    return f.add_slow(a, b);
  }

  FieldElem neg(FieldElem a) const {
    const Impl& f = *impl_;
    if (f.p == 2) return a;
    if (f.k == 1) return {a.code == 0 ? 0 : f.p - a.code};
    std::uint32_t out = 0, scale = 1, v = a.code;
    for (unsigned i = 0; i < f.k; ++i) {
      const std::uint32_t d = v % f.p;
      v /= f.p;
      out += ((f.p - d) % f.p) * scale;
      scale *= f.p;
    }
    return {out};
  }

  FieldElem sub(FieldElem a, FieldElem b) const { return add(a, neg(b)); }

  FieldElem mul(FieldElem a, FieldElem b) const {
    const Impl& f = *impl_;
    if (f.k == 1) return {static_cast<std::uint32_t>((std::uint64_t{a.code} * b.code) % f.p)};
    if (!f.mul_tab.empty()) return {f.mul_tab[a.code * f.q + b.code]};
    return f.mul_slow(a, b);
  }

  FieldElem pow(FieldElem a, std::uint64_t e) const { return impl_->pow(a, e); }

  FieldElem inv(FieldElem a) const {
    if (a.code == 0) throw argument_error("inverse of zero");
    if (!impl_->inv_tab.empty()) return {impl_->inv_tab[a.code]};
    return pow(a, impl_->q - 2);
  }

  /// Absolute trace to GF(p): sum_{i<k} a^{p^i}. The result is a prime-field element.
  FieldElem trace(FieldElem a) const {
    if (!impl_->trace_tab.empty()) return {impl_->trace_tab[a.code]};
    return impl_->trace_slow(a);
  }

  /// The additive character exp(2 pi i Tr(a) / p).
  std::complex<double> character(FieldElem a) const {
    return root_of_unity(trace(a).code, impl_->p);
  }

  static std::complex<double> root_of_unity(std::uint64_t t, std::uint64_t p) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(t % p) / static_cast<double>(p);
    return {std::cos(angle), std::sin(angle)};
  }

  /// All q elements in code order (low digit fastest).
  std::vector<FieldElem> elements() const {
    std::vector<FieldElem> out(impl_->q);
    for (std::uint64_t i = 0; i < impl_->q; ++i) out[i] = {static_cast<std::uint32_t>(i)};
    return out;
  }

  std::string name() const {
    return "GF(" + std::to_string(impl_->p) + (impl_->k > 1 ? "^" + std::to_string(impl_->k) : "") + ")";
  }

 private:
  struct Impl {
    std::uint32_t p = 0;
    unsigned k = 0;
    std::uint64_t q = 0;
    detail::Poly modulus;
    std::vector<std::uint32_t> add_tab, mul_tab, inv_tab, trace_tab;

    FieldElem encode(const detail::Poly& c) const {
      std::uint64_t code = 0;
      for (std::size_t i = c.size(); i-- > 0;) code = code * p + c[i];
      return {static_cast<std::uint32_t>(code)};
    }

    detail::Poly decode(FieldElem a) const {
      detail::Poly c(k);
      std::uint64_t v = a.code;
      for (auto& ci : c) {
        ci = v % p;
        v /= p;
      }
      return c;
    }

    FieldElem reduce(detail::Poly c) const { return encode(detail::poly_mod(std::move(c), modulus, p)); }

    FieldElem add_slow(FieldElem a, FieldElem b) const {
      auto x = decode(a);
      const auto y = decode(b);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = (x[i] + y[i]) % p;
      return encode(x);
    }

    FieldElem mul_slow(FieldElem a, FieldElem b) const {
      const auto x = decode(a), y = decode(b);
      detail::Poly prod(2 * k, 0);
      for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j) prod[i + j] = (prod[i + j] + x[i] * y[j]) % p;
      return reduce(std::move(prod));
    }

    FieldElem pow(FieldElem a, std::uint64_t e) const {
      FieldElem r{1};
      while (e) {
        if (e & 1) r = mul_slow(r, a);
        a = mul_slow(a, a);
        e >>= 1;
      }
      return r;
    }

    FieldElem trace_slow(FieldElem a) const {
      FieldElem acc{0}, frob = a;
      for (unsigned i = 0; i < k; ++i) {
        acc = add_slow(acc, frob);
        frob = pow(frob, p);
      }
      return acc;
    }

    void build_tables() {
      if (q <= kTableLimit && k > 1) {
        add_tab.resize(q * q);
        mul_tab.resize(q * q);
        for (std::uint32_t x = 0; x < q; ++x)
          for (std::uint32_t y = 0; y < q; ++y) {
            add_tab[x * q + y] = add_slow({x}, {y}).code;
            mul_tab[x * q + y] = mul_slow({x}, {y}).code;
          }
      }
      if (q <= (std::uint64_t{1} << 16)) {
        inv_tab.assign(q, 0);
        trace_tab.assign(q, 0);
        for (std::uint32_t x = 1; x < q; ++x) inv_tab[x] = pow({x}, q - 2).code;
        for (std::uint32_t x = 0; x < q; ++x) trace_tab[x] = trace_slow({x}).code;
      }
    }
  };

  static detail::Poly find_modulus(std::uint64_t p, unsigned k) {
    // (c_0, ..., c_{k-1}) in lexicographic order: c_0 is the most significant key.
    detail::Poly m(k + 1, 0);
    m[k] = 1;
    while (true) {
      if (detail::is_irreducible(m, p)) return m;
      std::size_t i = k;
      while (i > 0 && ++m[i - 1] == p) m[--i] = 0;
      if (i == 0) break;
    }
    throw error("no irreducible polynomial found");  // unreachable for prime p
  }

  std::shared_ptr<const Impl> impl_;
};

/// field_make: the canonical GF(p^k).
inline Field field_make(std::uint64_t p, unsigned k) { return Field::make(p, k); }

/// enumerate_elements: every element in code order.
inline std::vector<FieldElem> enumerate_elements(const Field& f) { return f.elements(); }

/// An element bound to its field; arithmetic checks that both operands share a field.
class Element {
 public:
  Element(Field f, FieldElem e) : field_(std::move(f)), elem_(e) {
    if (!field_.contains(elem_)) throw argument_error("element not in field");
  }
  Element(Field f, std::span<const std::uint32_t> coeffs) : field_(std::move(f)), elem_(field_.from_coeffs(coeffs)) {}

  const Field& field() const { return field_; }
  FieldElem value() const { return elem_; }
  std::vector<std::uint32_t> coeffs() const { return field_.coeffs(elem_); }
  bool is_zero() const { return elem_.code == 0; }

  friend Element operator+(const Element& a, const Element& b) { return {a.same(b), a.field_.add(a.elem_, b.elem_)}; }
  friend Element operator-(const Element& a, const Element& b) { return {a.same(b), a.field_.sub(a.elem_, b.elem_)}; }
  friend Element operator*(const Element& a, const Element& b) { return {a.same(b), a.field_.mul(a.elem_, b.elem_)}; }
  Element operator-() const { return {field_, field_.neg(elem_)}; }
  Element inverse() const { return {field_, field_.inv(elem_)}; }
  friend bool operator==(const Element& a, const Element& b) { return a.field_ == b.field_ && a.elem_ == b.elem_; }

 private:
  const Field& same(const Element& o) const {
    if (!(field_ == o.field_)) throw argument_error("operands belong to different fields");
    return field_;
  }

  Field field_;
  FieldElem elem_;
};

enum class ArithOp { add, sub, mul, inv, neg };

/// Single entry point for field arithmetic; `b` is ignored for unary ops.
inline Element arith(const Element& a, const Element& b, ArithOp op) {
  switch (op) {
    case ArithOp::add: return a + b;
    case ArithOp::sub: return a - b;
    case ArithOp::mul: return a * b;
    case ArithOp::inv: return a.inverse();
    case ArithOp::neg: return -a;
  }
  throw argument_error("unknown arithmetic op");
}

/// Prime-field trace value and character value.
struct TraceCharacter {
  std::uint32_t trace;
  std::complex<double> chi;
};

inline TraceCharacter trace_and_character(const Field& f, FieldElem x) {
  const auto t = f.trace(x).code;
  return {t, Field::root_of_unity(t, f.p())};
}

/// Embedding GF(p^k) -> GF(p^{kl}) sending x to the smallest-code root of the source modulus.
class Embedding {
 public:
  Embedding(Field src, Field dst) : src_(std::move(src)), dst_(std::move(dst)) {
    if (src_.p() != dst_.p()) throw argument_error("embedding between fields of different characteristic");
    if (dst_.k() % src_.k() != 0) throw argument_error("embedding requires the source degree to divide the target degree");
    if (src_.k() == dst_.k()) {
      // a field embeds into itself by the identity
      identity_ = true;
      root_ = src_.x();
      return;
    }
    const auto mod = src_.modulus();
    for (std::uint64_t c = 0; c < dst_.q(); ++c) {
      const FieldElem r{static_cast<std::uint32_t>(c)};
      FieldElem acc = Field::zero();
      for (std::size_t i = mod.size(); i-- > 0;) acc = dst_.add(dst_.mul(acc, r), FieldElem{mod[i]});
      if (acc == Field::zero()) {
        root_ = r;
        found_ = true;
        break;
      }
    }
    if (!found_) throw error("source modulus has no root in target field");
    powers_.resize(src_.k());
    FieldElem pw = Field::one();
    for (auto& v : powers_) {
      v = pw;
      pw = dst_.mul(pw, root_);
    }
  }

  const Field& source() const { return src_; }
  const Field& target() const { return dst_; }
  FieldElem root() const { return root_; }

  FieldElem operator()(FieldElem x) const {
    if (!src_.contains(x)) throw argument_error("element not in source field");
    if (identity_) return x;
    FieldElem acc = Field::zero();
    std::uint32_t v = x.code;
    for (const auto pw : powers_) {
      const std::uint32_t d = v % src_.p();
      v /= src_.p();
      // prime-field digits have the same code in every field of characteristic p
      if (d) acc = dst_.add(acc, dst_.mul(FieldElem{d}, pw));
    }
    return acc;
  }

 private:
  Field src_, dst_;
  FieldElem root_{};
  bool found_ = false;
  bool identity_ = false;
  std::vector<FieldElem> powers_;
};

inline FieldElem embed(const Field& src, const Field& dst, FieldElem x) { return Embedding(src, dst)(x); }

/// GF(q^l) seen as an l-dimensional space over GF(q), with basis 1, x, ..., x^{l-1}
/// where x is the generator of the canonical GF(p^{kl}).
class Extension {
 public:
  static constexpr std::uint64_t kCoordTableLimit = std::uint64_t{1} << 22;

  Extension(Field base, unsigned l)
      : base_(std::move(base)), ext_(Field::make(base_.p(), base_.k() * l)), l_(l), emb_(base_, ext_) {
    if (l < 1) throw argument_error("extension degree must be >= 1");
    basis_.resize(l);
    FieldElem pw = Field::one();
    for (auto& b : basis_) {
      b = pw;
      pw = ext_.mul(pw, ext_.x());
    }
    if (base_.k() > 1) {
      if (ext_.q() > kCoordTableLimit) throw guard_error("extension too large for coordinate table");
      coord_tab_.assign(ext_.q(), 0);
      std::vector<std::uint32_t> digits(l, 0);
      const auto qb = static_cast<std::uint32_t>(base_.q());
      for (std::uint64_t idx = 0; idx < ext_.q(); ++idx) {
        FieldElem acc = Field::zero();
        for (unsigned i = 0; i < l; ++i) acc = ext_.add(acc, ext_.mul(emb_(FieldElem{digits[i]}), basis_[i]));
        coord_tab_[acc.code] = static_cast<std::uint32_t>(idx);
        for (unsigned i = 0; i < l && ++digits[i] == qb; ++i) digits[i] = 0;
      }
    }
  }

  const Field& base() const { return base_; }
  const Field& ext() const { return ext_; }
  unsigned degree() const { return l_; }
  const Embedding& embedding() const { return emb_; }
  FieldElem embed(FieldElem a) const { return emb_(a); }
  /// Basis element x^i.
  FieldElem basis(unsigned i) const { return basis_.at(i); }

  /// Coordinates of y in the basis 1, x, ..., x^{l-1}, as base-field elements.
  std::vector<FieldElem> coords(FieldElem y) const {
    std::vector<FieldElem> c(l_);
    std::uint64_t v = base_.k() > 1 ? coord_tab_[y.code] : y.code;
    const auto qb = base_.q();
    for (auto& ci : c) {
      ci = FieldElem{static_cast<std::uint32_t>(v % qb)};
      v /= qb;
    }
    return c;
  }

  /// Inverse of coords().
  FieldElem from_coords(std::span<const FieldElem> c) const {
    if (c.size() != l_) throw argument_error("coordinate vector length must equal extension degree");
    FieldElem acc = Field::zero();
    for (unsigned i = 0; i < l_; ++i) acc = ext_.add(acc, ext_.mul(emb_(c[i]), basis_[i]));
    return acc;
  }

 private:
  Field base_, ext_;
  unsigned l_;
  Embedding emb_;
  std::vector<FieldElem> basis_;
  std::vector<std::uint32_t> coord_tab_;
};

}  // namespace tenrank
