#include <gtest/gtest.h>

#include <random>

#include "tenrank/constructions.hpp"

using namespace tenrank;

namespace {

std::vector<FieldElem> random_vec(const Field& f, std::size_t n, std::mt19937_64& rng) {
  std::vector<FieldElem> v(n);
  for (auto& x : v) x = FieldElem{static_cast<std::uint32_t>(rng() % f.q())};
  return v;
}

// Schoolbook product of coefficient vectors.
std::vector<FieldElem> poly_mul(const Field& f, const std::vector<FieldElem>& a, const std::vector<FieldElem>& b) {
  std::vector<FieldElem> out(a.size() + b.size() - 1, Field::zero());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] = f.add(out[i + j], f.mul(a[i], b[j]));
  return out;
}

// Contracts all modes but the last with the given vectors.
std::vector<FieldElem> apply_inputs(const Tensor& t, const std::vector<std::vector<FieldElem>>& xs) {
  std::vector<std::size_t> modes;
  for (std::size_t i = 0; i + 1 < t.order(); ++i) modes.push_back(i);
  return contract(t, modes, xs).entries();
}

}  // namespace

TEST(Interpolation, TermCountsAndReconstruction) {
  struct Case {
    std::size_t d, l;
    std::uint64_t p;
    unsigned k;
  };
  for (auto c : {Case{3, 2, 3, 1}, Case{3, 3, 7, 1}, Case{2, 2, 2, 1}, Case{4, 2, 5, 1}, Case{3, 2, 2, 2}}) {
    const Field f = Field::make(c.p, c.k);
    const auto dec = interp_decomp(c.d, c.l, f);
    const std::size_t n = (c.d - 1) * (c.l - 1);
    EXPECT_EQ(dec.cert.terms.size(), n + 1);
    EXPECT_EQ(dec.points.size(), n + 1);
    EXPECT_EQ(dec.points[0], Field::zero());
    const Tensor m = dec.cert.assemble();
    Shape expect(c.d - 1, c.l);
    expect.push_back(n + 1);
    EXPECT_EQ(m.shape(), expect);
    // the decomposition multiplies polynomials
    std::mt19937_64 rng(c.p * 10 + c.l);
    for (int it = 0; it < 10; ++it) {
      std::vector<std::vector<FieldElem>> xs;
      std::vector<FieldElem> prod{Field::one()};
      for (std::size_t i = 0; i + 1 < c.d; ++i) {
        xs.push_back(random_vec(f, c.l, rng));
        prod = poly_mul(f, prod, xs.back());
      }
      EXPECT_EQ(apply_inputs(m, xs), prod);
    }
  }
}

TEST(Interpolation, RejectsSmallFields) {
  EXPECT_THROW(interp_decomp(3, 3, Field::make(2, 1)), argument_error);
  EXPECT_THROW(interp_decomp(3, 3, Field::make(3, 1)), argument_error);
  EXPECT_NO_THROW(interp_decomp(3, 3, Field::make(5, 1)));
}

TEST(Interpolation, PushforwardMultipliesInExtension) {
  struct Case {
    std::size_t d, l;
    std::uint64_t p;
  };
  for (auto c : {Case{3, 2, 3}, Case{3, 3, 7}, Case{2, 2, 2}}) {
    const Field f = Field::make(c.p, 1);
    const auto dec = interp_decomp(c.d, c.l, f);
    const auto cert = pushforward_to_extension(dec, c.d, c.l, f);
    EXPECT_EQ(cert.terms.size(), dec.cert.terms.size());
    const Tensor t = cert.assemble();
    const Extension ext(f, static_cast<unsigned>(c.l));
    std::mt19937_64 rng(c.p);
    for (int it = 0; it < 20; ++it) {
      std::vector<std::vector<FieldElem>> xs;
      FieldElem prod = Field::one();
      for (std::size_t i = 0; i + 1 < c.d; ++i) {
        const FieldElem y{static_cast<std::uint32_t>(rng() % ext.ext().q())};
        xs.push_back(ext.coords(y));
        prod = ext.ext().mul(prod, y);
      }
      EXPECT_EQ(apply_inputs(t, xs), ext.coords(prod));
    }
  }
}

TEST(Interpolation, SubrankCertificates) {
  struct Case {
    std::size_t d, l;
    std::uint64_t p;
    std::size_t expect;
  };
  for (auto c : {Case{3, 3, 5, 2}, Case{3, 2, 2, 1}, Case{2, 3, 3, 3}, Case{3, 5, 3, 3}}) {
    const Field f = Field::make(c.p, 1);
    const auto cert = subrank_cert_interpolation(c.d, c.l, f);
    EXPECT_TRUE(cert.verify());
    // identity built directly
    Tensor id(f, Shape(c.d, c.expect));
    for (std::size_t i = 0; i < c.expect; ++i) id.set(std::vector<std::size_t>(c.d, i), Field::one());
    EXPECT_EQ(apply_matrices(cert.m, cert.source), id);
    EXPECT_EQ(cert.source, mult_tensor(c.d, f, static_cast<unsigned>(c.l)));
  }
  EXPECT_THROW(subrank_cert_interpolation(2, 4, Field::make(3, 1)), argument_error);
}

TEST(TwTensor, ContractionsRecoverBasis) {
  const Field f3 = Field::make(3, 1);
  Tensor a(f3, {2, 3}), b(f3, {2, 3});
  a.set({0, 0}, Field::one());
  a.set({1, 1}, Field::one());
  b.set({0, 2}, FieldElem{2});
  b.set({1, 0}, Field::one());
  const TensorSubspace w(f3, {2, 3}, {a, b});
  const Tensor t = tw_tensor(w);
  const std::size_t m = 3, n = 2;
  EXPECT_EQ(t.shape(), (Shape{2, 3, m * n, m * n}));
  for (std::size_t e1 = 0; e1 < m * n; ++e1)
    for (std::size_t e2 = 0; e2 < m * n; ++e2) {
      std::vector<FieldElem> u(m * n, Field::zero()), v(m * n, Field::zero());
      u[e1] = v[e2] = Field::one();
      const std::size_t modes[] = {2, 3};
      const std::vector<FieldElem> fs[] = {u, v};
      const Tensor s = contract(t, modes, fs);
      if (e1 == e2)
        EXPECT_EQ(s, w.basis()[e1 / m]);
      else
        EXPECT_TRUE(s.is_zero());
    }
}

TEST(TwTensor, NamedExamples) {
  const Field f2 = Field::make(2, 1);
  Tensor e11(f2, {2, 2});
  e11.set({0, 0}, Field::one());
  const TensorSubspace w1(f2, {2, 2}, {e11});
  const Tensor t1 = tw_tensor(w1);
  EXPECT_EQ(t1.shape(), (Shape{2, 2, 2, 2}));
  EXPECT_EQ(slice_rank(t1).value, 1u);
  EXPECT_EQ(sr_subspace(w1).value, 1u);

  const TensorSubspace w2(f2, {2, 2}, {identity_tensor(2, 2, f2)});
  EXPECT_EQ(slice_rank(tw_tensor(w2)).value, 2u);
  EXPECT_EQ(sr_subspace(w2).value, 2u);

  EXPECT_THROW(tw_tensor(TensorSubspace(f2, {2, 2}, {})), argument_error);
}

TEST(PolyChain, ExamplesAndRejection) {
  const Field f2 = Field::make(2, 1);
  const auto c = poly_monotonicity_check(3, 2, 3, f2);
  EXPECT_TRUE(c.lower.verify());
  EXPECT_TRUE(c.upper.verify());
  EXPECT_EQ(c.lower.target, mult_tensor(3, f2, 2));
  EXPECT_EQ(c.upper.source, mult_tensor(3, f2, 3));
  EXPECT_EQ(c.upper.target, c.lower.source);
  // composing the two certificates restricts GF(8) multiplication to GF(4) multiplication
  EXPECT_EQ(apply_matrices(compose(c.lower.m, c.upper.m), mult_tensor(3, f2, 3)), mult_tensor(3, f2, 2));
  const auto triv = poly_monotonicity_check(2, 2, 2, f2);
  EXPECT_EQ(triv.lower.target, Tensor(f2, {2, 2}, {FieldElem{1}, FieldElem{0}, FieldElem{0}, FieldElem{1}}));
  EXPECT_THROW(poly_monotonicity_check(3, 3, 3, f2), argument_error);
  EXPECT_NO_THROW(poly_monotonicity_check(3, 2, 5, Field::make(3, 1)));
}
