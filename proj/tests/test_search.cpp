#include <gtest/gtest.h>

#include <queue>
#include <random>

#include "tenrank/search.hpp"

using namespace tenrank;

namespace {

// GF(2) tensors with at most 16 entries, stored as bitmasks.
using Code = std::uint32_t;

Code to_code(const Tensor& t) {
  Code c = 0;
  for (std::size_t i = 0; i < t.size(); ++i) c |= Code{t[i].code} << i;
  return c;
}

Tensor from_code(const Shape& shape, Code c) {
  const Field f2 = Field::make(2, 1);
  Tensor t(f2, shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = FieldElem{(c >> i) & 1};
  return t;
}

// Row-major multi-index of a flat position.
std::vector<std::size_t> digits_of(const Shape& shape, std::size_t flat) {
  std::vector<std::size_t> idx(shape.size());
  for (std::size_t i = shape.size(); i-- > 0;) {
    idx[i] = flat % shape[i];
    flat /= shape[i];
  }
  return idx;
}

// All products x(P) * y(P^c) for a bipartition given as a mode mask, built entry by entry.
std::vector<Code> products_for(const Shape& shape, std::uint32_t mask) {
  std::size_t np = 1, nc = 1;
  for (std::size_t i = 0; i < shape.size(); ++i) (mask >> i & 1 ? np : nc) *= shape[i];
  const std::size_t total = np * nc;
  std::vector<Code> out;
  for (Code a = 1; a < (Code{1} << np); ++a)
    for (Code b = 1; b < (Code{1} << nc); ++b) {
      Code t = 0;
      for (std::size_t flat = 0; flat < total; ++flat) {
        const auto idx = digits_of(shape, flat);
        std::size_t ip = 0, ic = 0;
        for (std::size_t i = 0; i < shape.size(); ++i) {
          if (mask >> i & 1)
            ip = ip * shape[i] + idx[i];
          else
            ic = ic * shape[i] + idx[i];
        }
        if ((a >> ip & 1) && (b >> ic & 1)) t |= Code{1} << flat;
      }
      out.push_back(t);
    }
  return out;
}

// Breadth-first distance from 0 when each step adds one generator.
std::vector<int> bfs_ranks(std::size_t total, const std::vector<Code>& gens) {
  std::vector<int> dist(std::size_t{1} << total, -1);
  std::queue<Code> q;
  dist[0] = 0;
  q.push(0);
  while (!q.empty()) {
    const Code c = q.front();
    q.pop();
    for (Code g : gens)
      if (dist[c ^ g] < 0) {
        dist[c ^ g] = dist[c] + 1;
        q.push(c ^ g);
      }
  }
  return dist;
}

std::vector<int> slice_oracle(const Shape& shape) {
  std::vector<Code> gens;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    auto g = products_for(shape, 1u << i);
    gens.insert(gens.end(), g.begin(), g.end());
  }
  return bfs_ranks(shape_size(shape), gens);
}

std::vector<int> partition_oracle(const Shape& shape, int excluded = -1) {
  std::vector<Code> gens;
  const std::uint32_t all = (1u << shape.size()) - 1;
  for (std::uint32_t m = 1; m < all; ++m) {
    if (excluded >= 0 && (m == 1u << excluded || (all & ~m) == 1u << excluded)) continue;
    auto g = products_for(shape, m);
    gens.insert(gens.end(), g.begin(), g.end());
  }
  return bfs_ranks(shape_size(shape), gens);
}

std::vector<int> cp_oracle(const Shape& shape) {
  std::vector<Code> gens;
  const std::size_t total = shape_size(shape);
  // products of one nonzero vector per mode
  std::vector<std::size_t> pick(shape.size(), 1);
  while (true) {
    Code t = 0;
    for (std::size_t flat = 0; flat < total; ++flat) {
      const auto idx = digits_of(shape, flat);
      bool on = true;
      for (std::size_t i = 0; i < shape.size(); ++i) on &= (pick[i] >> idx[i] & 1) != 0;
      if (on) t |= Code{1} << flat;
    }
    gens.push_back(t);
    std::size_t i = 0;
    while (i < shape.size() && ++pick[i] == (std::size_t{1} << shape[i])) pick[i++] = 1;
    if (i == shape.size()) break;
  }
  return bfs_ranks(total, gens);
}

}  // namespace

TEST(SliceRank, IdentityTensors) {
  for (std::uint64_t p : {2u, 3u})
    for (std::size_t n = 1; n <= 3; ++n) {
      const auto r = slice_rank(identity_tensor(n, 3, Field::make(p, 1)));
      EXPECT_EQ(r.value, n);
      EXPECT_EQ(r.cert.terms.size(), n);
    }
  EXPECT_EQ(slice_rank(identity_tensor(2, 2, Field::make(2, 1))).value, 2u);
  EXPECT_EQ(slice_rank(Tensor(Field::make(2, 1), {2, 2, 2})).value, 0u);
}

TEST(SliceRank, MatchesBfsOracleOnAllSmallTensors) {
  const Shape shape{2, 2, 2};
  const auto oracle = slice_oracle(shape);
  for (Code c = 0; c < 256; ++c) {
    const Tensor t = from_code(shape, c);
    const auto r = slice_rank(t);
    ASSERT_EQ(static_cast<int>(r.value), oracle[c]) << c;
    EXPECT_TRUE(r.cert.verify(t));
    for (const auto& term : r.cert.terms) EXPECT_EQ(std::popcount(term.modes), 1);
  }
}

TEST(SliceRank, MatchesBfsOracleOnRectangularShape) {
  const Shape shape{2, 3, 2};
  const auto oracle = slice_oracle(shape);
  std::mt19937_64 rng(17);
  for (int it = 0; it < 150; ++it) {
    const Code c = static_cast<Code>(rng() & 0xfff);
    EXPECT_EQ(static_cast<int>(slice_rank(from_code(shape, c)).value), oracle[c]);
  }
}

TEST(SliceRank, GuardRejectsLargeInstances) {
  EXPECT_THROW(slice_rank(Tensor(Field::make(5, 1), {2, 2, 2})), guard_error);
  EXPECT_THROW(slice_rank(Tensor(Field::make(2, 1), {5, 2, 2})), guard_error);
  EXPECT_THROW(slice_rank(Tensor(Field::make(2, 1), {2})), argument_error);
}

TEST(SliceRank, CertificateIsDeterministic) {
  std::mt19937_64 rng(3);
  const Tensor t = random_tensor(Field::make(3, 1), {2, 2, 2}, rng);
  const auto a = slice_rank(t), b = slice_rank(t);
  ASSERT_EQ(a.cert.terms.size(), b.cert.terms.size());
  for (std::size_t i = 0; i < a.cert.terms.size(); ++i) {
    EXPECT_EQ(a.cert.terms[i].a, b.cert.terms[i].a);
    EXPECT_EQ(a.cert.terms[i].b, b.cert.terms[i].b);
  }
}

TEST(SliceRank, TamperedCertificateFails) {
  const Tensor t = identity_tensor(2, 3, Field::make(2, 1));
  auto r = slice_rank(t);
  r.cert.terms[0].b[0] = Field::make(2, 1).add(r.cert.terms[0].b[0], Field::one());
  EXPECT_FALSE(r.cert.verify(t));
}

TEST(PartitionRank, EqualsSliceRankAtOrderThree) {
  std::mt19937_64 rng(21);
  for (std::uint64_t p : {2u, 3u})
    for (int it = 0; it < 40; ++it) {
      const Tensor t = random_tensor(Field::make(p, 1), {2, 2, 2}, rng);
      PartitionOptions generic;
      generic.engine = MembershipEngine::generic;
      const auto fast = partition_rank(t), slow = partition_rank(t, generic);
      EXPECT_EQ(fast.value, slow.value);
      EXPECT_EQ(fast.value, slice_rank(t).value);
      EXPECT_TRUE(slow.cert.verify(t));
    }
}

TEST(PartitionRank, MatchesBfsOracleAtOrderFour) {
  const Shape shape{2, 2, 2, 2};
  const auto oracle = partition_oracle(shape);
  std::mt19937_64 rng(5);
  int seen_two = 0;
  for (int it = 0; it < 60; ++it) {
    const Code c = static_cast<Code>(rng() & 0xffff);
    const Tensor t = from_code(shape, c);
    const auto r = partition_rank(t);
    ASSERT_EQ(static_cast<int>(r.value), oracle[c]) << c;
    EXPECT_TRUE(r.cert.verify(t));
    seen_two += r.value >= 2;
  }
  EXPECT_GT(seen_two, 0);
  EXPECT_EQ(partition_rank(identity_tensor(2, 4, Field::make(2, 1))).value, static_cast<std::size_t>(oracle[to_code(identity_tensor(2, 4, Field::make(2, 1)))]));
}

TEST(PartitionRank, CarriersCoverBipartitionsOnce) {
  const auto c3 = partition_carriers({2, 2, 2});
  ASSERT_EQ(c3.size(), 3u);
  for (const auto& c : c3) EXPECT_EQ(std::popcount(c.modes), 1);
  const auto c4 = partition_carriers({2, 2, 2, 2});
  EXPECT_EQ(c4.size(), 7u);
  EXPECT_EQ(partition_carriers({2, 2, 2, 2}, 3).size(), 6u);
}

TEST(PartitionRank, OverSubfieldOfDefinedTensorMatchesBaseRank) {
  const Field f2 = Field::make(2, 1), f4 = Field::make(2, 2);
  const Extension ext(f2, 2);
  std::mt19937_64 rng(9);
  for (int it = 0; it < 10; ++it) {
    const Tensor t = random_tensor(f2, {2, 2, 2}, rng);
    Tensor lifted(f4, t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) lifted[i] = ext.embed(t[i]);
    EXPECT_EQ(partition_rank_over_subfield(lifted, f2).value, partition_rank(t).value);
  }
}

TEST(PartitionRank, OverSubfieldMatchesRestrictedOracle) {
  const Field f2 = Field::make(2, 1), f4 = Field::make(2, 2);
  const Extension ext(f2, 2);
  const Shape shape{2, 2, 2, 2};
  const auto oracle = partition_oracle(shape, 3);
  std::mt19937_64 rng(13);
  for (int it = 0; it < 12; ++it) {
    const Tensor s = random_tensor(f4, {2, 2, 2}, rng);
    const Tensor ct = coordinate_tensor(s, ext);
    const auto r = partition_rank_over_subfield(s, f2);
    EXPECT_EQ(static_cast<int>(r.value), oracle[to_code(ct)]);
    EXPECT_TRUE(r.cert.verify(ct));
  }
}

TEST(CpRank, MatchesBfsOracle) {
  const Shape shape{2, 2, 2};
  const auto oracle = cp_oracle(shape);
  for (Code c = 0; c < 256; c += 3) {
    const Tensor t = from_code(shape, c);
    const auto r = cp_rank(t);
    ASSERT_EQ(static_cast<int>(r.value), oracle[c]) << c;
    EXPECT_TRUE(r.cert.verify(t));
  }
}

TEST(CpRank, KnownValues) {
  const Field f2 = Field::make(2, 1);
  EXPECT_EQ(cp_rank(identity_tensor(2, 3, f2)).value, 2u);
  // multiplication in GF(4) over GF(2) needs three products
  const auto r = cp_rank(mult_tensor(3, f2, 2));
  EXPECT_EQ(r.value, 3u);
  for (const auto& term : r.cert.terms) EXPECT_EQ(term.factors.size(), 3u);
  EXPECT_THROW(cp_rank(Tensor(f2, {5, 5, 5})), guard_error);
}

TEST(Subrank, IdentityAndW) {
  const Field f2 = Field::make(2, 1);
  const Tensor id2 = identity_tensor(2, 3, f2);
  const auto cert = subrank_at_least(id2, 2);
  ASSERT_TRUE(cert.has_value());
  EXPECT_TRUE(cert->verify());
  EXPECT_FALSE(subrank_at_least(id2, 3).has_value());
  // e_{011} + e_{101} + e_{110} has subrank 1
  Tensor w(f2, {2, 2, 2});
  w.set({0, 1, 1}, Field::one());
  w.set({1, 0, 1}, Field::one());
  w.set({1, 1, 0}, Field::one());
  EXPECT_TRUE(subrank_at_least(w, 1).has_value());
  EXPECT_FALSE(subrank_at_least(w, 2).has_value());
  EXPECT_TRUE(subrank_at_least(w, 0).has_value());
}

TEST(Subrank, BoundedBySliceRank) {
  std::mt19937_64 rng(31);
  const Field f2 = Field::make(2, 1);
  for (int it = 0; it < 20; ++it) {
    const Tensor t = random_tensor(f2, {2, 2, 2}, rng);
    const std::size_t sr = slice_rank(t).value;
    EXPECT_FALSE(subrank_at_least(t, sr + 1).has_value());
  }
}

TEST(SubspaceSliceRank, SingleTensorMatchesSliceRank) {
  std::mt19937_64 rng(2);
  const Field f3 = Field::make(3, 1);
  for (int it = 0; it < 20; ++it) {
    const Tensor t = random_tensor(f3, {2, 2, 2}, rng);
    if (t.is_zero()) continue;
    const auto r = sr_subspace(TensorSubspace(f3, t.shape(), {t}));
    EXPECT_EQ(r.value, slice_rank(t).value);
    std::size_t codims = 0;
    for (const auto& u : r.witness) codims += u.codim();
    EXPECT_EQ(codims, r.value);
  }
}

TEST(SubspaceSliceRank, WitnessCheckRejectsBadTuples) {
  const Field f2 = Field::make(2, 1);
  const TensorSubspace w(f2, {2, 2, 2}, {identity_tensor(2, 3, f2)});
  const std::vector<Subspace> full(3, Subspace::full(f2, 2));
  EXPECT_FALSE(verify_subspace_witness(w, full));
  const auto r = sr_subspace(w);
  EXPECT_EQ(r.value, 2u);
  EXPECT_TRUE(verify_subspace_witness(w, r.witness));
}

TEST(SubspaceSliceRank, MonotoneInK) {
  std::mt19937_64 rng(44);
  const Field f2 = Field::make(2, 1);
  std::vector<Tensor> basis;
  while (basis.size() < 3) {
    basis.push_back(random_tensor(f2, {2, 2, 2}, rng));
    try {
      TensorSubspace(f2, {2, 2, 2}, basis);
    } catch (const argument_error&) {
      basis.pop_back();
    }
  }
  const TensorSubspace w(f2, {2, 2, 2}, basis);
  std::size_t prev = 0;
  for (std::size_t k = 0; k <= 3; ++k) {
    const auto r = sr_k_subspace(w, k);
    EXPECT_GE(r.value, prev);
    prev = r.value;
  }
  EXPECT_EQ(prev, sr_subspace(w).value);
}

TEST(Subrank, IdentityCertificateForDiagonal) {
  const Field f2 = Field::make(2, 1);
  const auto cert = subrank_at_least(identity_tensor(2, 3, f2), 2);
  ASSERT_TRUE(cert.has_value());
  for (const auto& m : cert->m.mats) EXPECT_EQ(m, Matrix::identity(f2, 2));
}

TEST(Subrank, MatchesUnnormalisedSearch) {
  // brute force over all (M_1, M_2, M_3) for s = 2 on (2,2,2) tensors over GF(2)
  const Field f2 = Field::make(2, 1);
  const Tensor id2 = identity_tensor(2, 3, f2);
  std::mt19937_64 rng(12);
  for (int it = 0; it < 12; ++it) {
    const Tensor t = random_tensor(f2, {2, 2, 2}, rng);
    bool found = false;
    for (std::uint32_t code = 0; code < (1u << 12) && !found; ++code) {
      MatrixTuple m;
      for (int k = 0; k < 3; ++k) {
        Matrix mk(f2, 2, 2);
        for (int e = 0; e < 4; ++e) mk(e / 2, e % 2) = FieldElem{(code >> (4 * k + e)) & 1};
        m.mats.push_back(mk);
      }
      found = apply_matrices(m, t) == id2;
    }
    EXPECT_EQ(subrank_at_least(t, 2).has_value(), found);
  }
}
