#include <gtest/gtest.h>

#include <random>
#include <set>

#include "tenrank/subspace.hpp"

using namespace tenrank;

namespace {

// Counts distinct spans of all k-tuples of vectors; an enumeration-free oracle for the Gaussian binomial.
std::size_t count_spans(std::size_t n, const Field& f, std::size_t k) {
  std::uint64_t vectors = 1;
  for (std::size_t i = 0; i < n; ++i) vectors *= f.q();
  std::set<std::vector<FieldElem>> seen;
  std::uint64_t tuples = 1;
  for (std::size_t i = 0; i < k; ++i) tuples *= vectors;
  for (std::uint64_t t = 0; t < tuples; ++t) {
    std::vector<std::vector<FieldElem>> vs;
    std::uint64_t c = t;
    for (std::size_t i = 0; i < k; ++i) {
      std::uint64_t v = c % vectors;
      c /= vectors;
      std::vector<FieldElem> vec(n);
      for (auto& x : vec) {
        x = FieldElem{static_cast<std::uint32_t>(v % f.q())};
        v /= f.q();
      }
      vs.push_back(vec);
    }
    const Subspace s = rref(f, n, vs);
    if (s.dim() == k) seen.insert(s.basis().data());
  }
  return seen.size();
}

Subspace span1(const Field& f, std::vector<std::uint32_t> v) {
  std::vector<FieldElem> e;
  for (auto x : v) e.push_back(FieldElem{x});
  return rref(f, e.size(), {e});
}

}  // namespace

TEST(Subspace, RrefExamples) {
  const Field f2 = Field::make(2, 1), f3 = Field::make(3, 1);
  const Subspace s = rref(f2, 2, {{FieldElem{1}, FieldElem{1}}, {FieldElem{0}, FieldElem{1}}});
  EXPECT_EQ(s.basis(), Matrix::identity(f2, 2));
  EXPECT_EQ(span1(f3, {2, 2}).basis().data(), (std::vector<FieldElem>{{1}, {1}}));
  EXPECT_EQ(rref(f2, 3, {}).dim(), 0u);
}

TEST(Subspace, EnumerationCounts) {
  const Field f2 = Field::make(2, 1);
  EXPECT_EQ(enumerate_subspaces(2, f2).size(), 5u);
  EXPECT_EQ(enumerate_subspaces(3, f2).size(), 16u);
  EXPECT_EQ(enumerate_subspaces(3, f2, 0).size(), 1u);
  for (std::uint64_t p : {2u, 3u}) {
    const Field f = Field::make(p, 1);
    for (std::size_t n = 1; n <= 4; ++n)
      for (std::size_t k = 0; k <= n; ++k) {
        const auto subs = enumerate_subspaces(n, f, k);
        EXPECT_EQ(subs.size(), gaussian_binomial(n, k, p));
        if (n <= 3 && (p == 2 || n <= 2)) {
          EXPECT_EQ(subs.size(), count_spans(n, f, k)) << n << " " << k;
        }
        std::set<std::vector<FieldElem>> distinct;
        for (const auto& s : subs) {
          EXPECT_EQ(s.dim(), k);
          distinct.insert(s.basis().data());
        }
        EXPECT_EQ(distinct.size(), subs.size());
      }
  }
}

TEST(Subspace, EnumerationGuard) {
  EXPECT_THROW(enumerate_subspaces(7, Field::make(2, 1)), guard_error);
  EXPECT_THROW(enumerate_subspaces(6, Field::make(5, 1)), guard_error);
  EXPECT_NO_THROW(enumerate_subspaces(6, Field::make(2, 1), 1));
}

TEST(Subspace, AnnihilatorExamples) {
  const Field f2 = Field::make(2, 1);
  EXPECT_EQ(annihilator(Subspace::full(f2, 2)).dim(), 0u);
  EXPECT_EQ(annihilator(span1(f2, {1, 0})), span1(f2, {0, 1}));
  EXPECT_EQ(annihilator(span1(f2, {1, 1})), span1(f2, {1, 1}));
}

TEST(Subspace, AnnihilatorIsInclusionReversingInvolution) {
  const Field f2 = Field::make(2, 1);
  const auto all = enumerate_subspaces(3, f2);
  for (const auto& a : all) {
    const Subspace ann = annihilator(a);
    EXPECT_EQ(a.dim() + ann.dim(), 3u);
    EXPECT_EQ(annihilator(ann), a);
    for (const auto& b : all)
      if (b.contains(a)) {
        EXPECT_TRUE(ann.contains(annihilator(b)));
      }
  }
}

TEST(Subspace, MemberOfSliceSumExamples) {
  const Field f2 = Field::make(2, 1);
  const Tensor id2 = identity_tensor(2, 3, f2);
  const SlicePart two[] = {{0b001, span1(f2, {1, 0})}, {0b010, span1(f2, {0, 1})}};
  EXPECT_TRUE(member_of_slice_sum(id2, two));
  const SlicePart one[] = {{0b001, span1(f2, {1, 0})}};
  EXPECT_FALSE(member_of_slice_sum(id2, one));
  std::mt19937_64 rng(4);
  const SlicePart full[] = {{0b001, Subspace::full(f2, 2)}};
  EXPECT_TRUE(member_of_slice_sum(random_tensor(f2, {2, 2, 2}, rng), full));
  const SlicePart bad[] = {{0b001, Subspace::full(f2, 3)}};
  EXPECT_THROW(member_of_slice_sum(id2, bad), argument_error);
}

TEST(Subspace, MemberOfSliceSumIsMonotone) {
  std::mt19937_64 rng(8);
  const Field f2 = Field::make(2, 1);
  const auto subs = enumerate_subspaces(2, f2);
  const auto pairs = enumerate_subspaces(4, f2);
  for (int it = 0; it < 200; ++it) {
    const Tensor t = random_tensor(f2, {2, 2, 2}, rng);
    const Subspace& a = subs[rng() % subs.size()];
    const Subspace& b = pairs[rng() % pairs.size()];
    const SlicePart small[] = {{0b001, a}, {0b110, b}};
    if (!member_of_slice_sum(t, small)) continue;
    // enlarge each part by one random vector
    for (const auto& bigger_a : subs) {
      if (!bigger_a.contains(a)) continue;
      const SlicePart big[] = {{0b001, bigger_a}, {0b110, b}};
      EXPECT_TRUE(member_of_slice_sum(t, big));
    }
  }
}

TEST(Subspace, TensorSubspaceRejectsDependentBasis) {
  const Field f2 = Field::make(2, 1);
  const Tensor id = identity_tensor(2, 2, f2);
  EXPECT_THROW(TensorSubspace(f2, {2, 2}, {id, id}), argument_error);
  EXPECT_EQ(TensorSubspace(f2, {2, 2}, {id}).dim(), 1u);
}
