#include <gtest/gtest.h>

#include <random>

#include "tenrank/constructions.hpp"
#include "tenrank/io.hpp"

using namespace tenrank;

TEST(Io, TensorRoundTrip) {
  std::mt19937_64 rng(1);
  const Tensor t = random_tensor(Field::make(3, 2), {2, 3, 2}, rng);
  const json j = tensor_to_json(t);
  EXPECT_EQ(j["p"], 3);
  EXPECT_EQ(j["k"], 2);
  EXPECT_EQ(tensor_from_json(json::parse(j.dump())), t);
}

TEST(Io, TensorLiteral) {
  const auto t = tensor_from_json(json::parse(R"({"p":2,"k":1,"shape":[2,2],"entries":[1,0,0,1]})"));
  EXPECT_EQ(t, identity_tensor(2, 2, Field::make(2, 1)));
}

TEST(Io, RejectsMalformedTensors) {
  const char* bad[] = {
      R"({"p":2,"k":1,"shape":[2,2],"entries":[1,0,0]})",
      R"({"p":2,"k":1,"shape":[2,2],"entries":[1,0,0,2]})",
      R"({"p":4,"k":1,"shape":[2,2],"entries":[1,0,0,1]})",
      R"({"p":2,"k":1,"shape":[4],"entries":[1,0,0,1]})",
      R"({"p":2,"k":1,"entries":[1,0,0,1]})",
      R"({"p":2,"k":1,"shape":[2,2],"entries":[1,0,0,-1]})",
      R"({"p":2,"k":1,"shape":[2,0],"entries":[]})",
  };
  for (const char* s : bad) EXPECT_THROW(tensor_from_json(json::parse(s)), parse_error) << s;
}

TEST(Io, SubspaceFiles) {
  const auto w = tensor_subspace_from_json(json::parse(R"({"p":2,"k":1,"shape":[2,2],"basis":[[1,0,0,0],[0,0,0,1]]})"));
  EXPECT_EQ(w.dim(), 2u);
  EXPECT_EQ(tensor_subspace_from_json(tensor_subspace_to_json(w)).basis(), w.basis());
  EXPECT_THROW(tensor_subspace_from_json(json::parse(R"({"p":2,"k":1,"shape":[2,2],"basis":[[1,0,0,0],[1,0,0,0]]})")), parse_error);
  EXPECT_EQ(tensor_subspace_from_json(json::parse(R"({"p":2,"k":1,"shape":[2,2],"basis":[]})")).dim(), 0u);
}

TEST(Io, DecompositionCertificatesReverify) {
  const Field f2 = Field::make(2, 1);
  const Tensor t = identity_tensor(3, 3, f2);
  const auto sr = slice_rank(t);
  const auto back = decomp_from_json(json::parse(decomp_to_json(sr.cert).dump()));
  EXPECT_TRUE(back.verify(t));
  const auto cp = cp_rank(mult_tensor(3, f2, 2));
  const auto cpb = decomp_from_json(decomp_to_json(cp.cert));
  EXPECT_TRUE(cpb.verify(mult_tensor(3, f2, 2)));
  EXPECT_EQ(cpb.terms[0].factors.size(), 3u);
  json broken = decomp_to_json(sr.cert);
  broken["terms"][0]["b"][0] = broken["terms"][0]["b"][0].get<unsigned>() ^ 1u;
  EXPECT_FALSE(decomp_from_json(broken).verify(t));
}

TEST(Io, RestrictionCertificatesReverify) {
  const auto c = subrank_cert_interpolation(3, 3, Field::make(5, 1));
  EXPECT_TRUE(restriction_from_json(json::parse(restriction_to_json(c).dump())).verify());
  const auto z = subrank_at_least(identity_tensor(2, 3, Field::make(2, 1)), 0);
  EXPECT_TRUE(restriction_from_json(restriction_to_json(*z)).verify());
}

TEST(Io, Decimal12) {
  EXPECT_EQ(decimal12(0.25), "0.250000000000");
  EXPECT_EQ(decimal12(2.0), "2.000000000000");
}
