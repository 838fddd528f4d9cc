#pragma once

// Exact rank searches that return re-verifiable certificates: slice rank,
// partition rank, cp-rank, subrank, and the slice rank of a tensor subspace.
//
// Slice and partition rank use iterative deepening on r. For every
// composition of r over the candidate parts (lexicographic order) and every
// tuple of subspaces (pivot-pattern order, first part outermost) we test
// whether T lies in sum_P S_P (x) V_{P^c}. The first success is returned, so
// certificates are deterministic.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tenrank/errors.hpp"
#include "tenrank/gf.hpp"
#include "tenrank/linalg.hpp"
#include "tenrank/subspace.hpp"
#include "tenrank/tensor.hpp"

namespace tenrank {

struct SearchGuard {
  std::size_t max_mode_dim = 4;             ///< slice search: every n_i
  std::uint64_t max_q = 3;                  ///< slice search: field size
  std::size_t max_part_size = 4;            ///< partition search: flattened size of every carrier side
  std::uint64_t max_rank_one = 10000;       ///< cp search: projective rank-one tensors
  std::uint64_t max_combinations = 100000000;
  std::uint64_t max_subrank_space = std::uint64_t{1} << 24;  ///< q^{s * sum n_i}
  std::uint64_t max_subspaces = std::uint64_t{1} << 16;      ///< sr_k: k-dim subspaces of W
};

enum class DecompKind { slice, partition, cp };

inline const char* kind_name(DecompKind k) {
  switch (k) {
    case DecompKind::slice: return "slice";
    case DecompKind::partition: return "partition";
    case DecompKind::cp: return "cp";
  }
  return "?";
}

/// One term a (x) b: a lives on the modes of `modes`, b on the complement.
struct DecompTerm {
  ModeMask modes = 0;
  Tensor a;
  Tensor b;
  std::vector<std::vector<FieldElem>> factors;  ///< cp terms only: one vector per mode
};

struct DecompCert {
  DecompKind kind = DecompKind::slice;
  Field field;
  Shape shape;
  std::vector<DecompTerm> terms;

  Tensor assemble() const {
    Tensor sum(field, shape);
    for (const auto& t : terms) sum += assemble_product(field, shape, t.modes, t.a.entries(), t.b.entries());
    return sum;
  }

  /// Structural checks plus exact reconstruction.
  bool verify(const Tensor& target) const {
    if (!(field == target.field()) || shape != target.shape()) return false;
    for (const auto& t : terms) {
      if (kind == DecompKind::slice && std::popcount(t.modes) != 1) return false;
      if (kind == DecompKind::cp && t.factors.size() != shape.size()) return false;
    }
    return assemble() == target;
  }
};

struct RankResult {
  std::size_t value = 0;
  DecompCert cert;
};

/// Witness for a restriction: apply_matrices(m, source) == target.
struct RestrictionCert {
  MatrixTuple m;
  Tensor source;
  Tensor target;

  bool verify() const { return apply_matrices(m, source) == target; }
};

namespace detail {

/// Row space kept in semi-echelon form; rows are reduced in insertion order.
class Echelon {
 public:
  Echelon(Field f, std::size_t cols) : f_(std::move(f)), cols_(cols) {}

  void reduce(std::vector<FieldElem>& v) const {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const FieldElem c = v[piv_[i]];
      if (c == Field::zero()) continue;
      const FieldElem nc = f_.neg(c);
      const auto& r = rows_[i];
      for (std::size_t j = 0; j < cols_; ++j)
        if (r[j] != Field::zero()) v[j] = f_.add(v[j], f_.mul(nc, r[j]));
    }
  }

  void insert(std::vector<FieldElem> v) {
    reduce(v);
    std::size_t p = 0;
    while (p < cols_ && v[p] == Field::zero()) ++p;
    if (p == cols_) return;
    const FieldElem s = f_.inv(v[p]);
    for (auto& x : v) x = f_.mul(x, s);
    rows_.push_back(std::move(v));
    piv_.push_back(p);
  }

  bool contains(std::vector<FieldElem> v) const {
    reduce(v);
    for (const auto x : v)
      if (x != Field::zero()) return false;
    return true;
  }

 private:
  Field f_;
  std::size_t cols_;
  std::vector<std::vector<FieldElem>> rows_;
  std::vector<std::size_t> piv_;
};

/// Subspaces of GF(q)^n by dimension, with annihilator bases, built on first use.
class SubspaceCache {
 public:
  explicit SubspaceCache(Field f) : f_(std::move(f)) {}

  const std::vector<Subspace>& get(std::size_t n, std::size_t dim) {
    auto key = std::make_pair(n, dim);
    auto it = subs_.find(key);
    if (it != subs_.end()) return it->second;
    check_enumeration_guard(n, f_);
    auto& v = subs_[key];
    for_each_subspace_of_dim(n, f_, dim, [&](const Subspace& s) {
      v.push_back(s);
      return true;
    });
    auto& a = anns_[key];
    for (const auto& s : v) a.push_back(annihilator(s).basis());
    return v;
  }

  const std::vector<Matrix>& annihilators(std::size_t n, std::size_t dim) {
    get(n, dim);
    return anns_[{n, dim}];
  }

 private:
  Field f_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Subspace>> subs_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Matrix>> anns_;
};

/// Compositions of r into caps.size() parts with part i <= caps[i], in lexicographic order.
inline bool for_each_composition(std::size_t r, const std::vector<std::size_t>& caps,
                                 const std::function<bool(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> comp(caps.size(), 0);
  std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) -> bool {
    if (i + 1 == caps.size()) {
      if (left > caps[i]) return true;
      comp[i] = left;
      return visit(comp);
    }
    for (std::size_t x = 0; x <= std::min(left, caps[i]); ++x) {
      comp[i] = x;
      if (!rec(i + 1, left - x)) return false;
    }
    return true;
  };
  if (caps.empty()) return r == 0 ? visit(comp) : true;
  return rec(0, r);
}

/// Candidate parts for a subspace-sum search: the carrier modes and the flattened carrier size.
struct Carrier {
  ModeMask modes;
  std::size_t size;
};

struct SumSearchHit {
  std::size_t value;
  std::vector<Subspace> spaces;  ///< one per carrier, possibly zero
};

/// Projection engine: every carrier is a single mode. T is in sum_i A_i (x) V_rest iff
/// projecting each mode onto V_i / A_i kills T.
inline std::optional<SumSearchHit> singleton_sum_search(const std::vector<Tensor>& ts, const Field& f,
                                                        const std::vector<Carrier>& carriers, std::size_t max_r,
                                                        SubspaceCache& cache) {
  std::vector<std::size_t> caps, mode_of;
  for (const auto& c : carriers) {
    caps.push_back(c.size);
    mode_of.push_back(static_cast<std::size_t>(std::countr_zero(c.modes)));
  }
  std::optional<SumSearchHit> hit;
  std::vector<std::size_t> choice(carriers.size());
  for (std::size_t r = 0; r <= max_r && !hit; ++r) {
    for_each_composition(r, caps, [&](const std::vector<std::size_t>& comp) {
      std::function<bool(std::size_t, const std::vector<Tensor>&)> dfs = [&](std::size_t c,
                                                                             const std::vector<Tensor>& cur) -> bool {
        if (c == carriers.size()) {
          for (const auto& t : cur)
            if (!t.is_zero()) return false;
          return true;
        }
        if (comp[c] == 0) {
          choice[c] = 0;
          return dfs(c + 1, cur);
        }
        const auto& anns = cache.annihilators(caps[c], comp[c]);
        for (std::size_t s = 0; s < anns.size(); ++s) {
          std::vector<Tensor> next;
          next.reserve(cur.size());
          for (const auto& t : cur) next.push_back(mode_product(t, mode_of[c], anns[s]));
          choice[c] = s;
          if (dfs(c + 1, next)) return true;
        }
        return false;
      };
      if (!dfs(0, ts)) return true;
      SumSearchHit h{r, {}};
      for (std::size_t c = 0; c < carriers.size(); ++c)
        h.spaces.push_back(comp[c] == 0 ? Subspace::zero(f, caps[c]) : cache.get(caps[c], comp[c])[choice[c]]);
      hit = std::move(h);
      return false;
    });
  }
  return hit;
}

/// Generic engine: arbitrary carriers, one incremental echelon basis of the generators per search node.
inline std::optional<SumSearchHit> generic_sum_search(const std::vector<Tensor>& ts, const Field& f, const Shape& shape,
                                                      const std::vector<Carrier>& carriers, std::size_t max_r,
                                                      SubspaceCache& cache) {
  std::vector<std::size_t> caps;
  for (const auto& c : carriers) caps.push_back(c.size);
  const std::size_t total = shape_size(shape);
  // generators of S (x) V_{P^c} for a basis row a: a (x) e_c for every complement index c
  auto add_generators = [&](Echelon& e, ModeMask modes, const std::vector<FieldElem>& a) {
    const std::size_t nc = total / a.size();
    std::vector<std::vector<FieldElem>> rows(nc, std::vector<FieldElem>(total, Field::zero()));
    for (std::size_t flat = 0; flat < total; ++flat) {
      const auto [i, j] = split_index(shape, modes, flat);
      rows[j][flat] = a[i];
    }
    for (auto& r : rows) e.insert(std::move(r));
  };
  std::optional<SumSearchHit> hit;
  std::vector<std::size_t> choice(carriers.size());
  for (std::size_t r = 0; r <= max_r && !hit; ++r) {
    for_each_composition(r, caps, [&](const std::vector<std::size_t>& comp) {
      std::function<bool(std::size_t, const Echelon&)> dfs = [&](std::size_t c, const Echelon& e) -> bool {
        if (c == carriers.size()) {
          for (const auto& t : ts)
            if (!e.contains(t.entries())) return false;
          return true;
        }
        if (comp[c] == 0) {
          choice[c] = 0;
          return dfs(c + 1, e);
        }
        const auto& subs = cache.get(caps[c], comp[c]);
        for (std::size_t s = 0; s < subs.size(); ++s) {
          Echelon next = e;
          for (std::size_t row = 0; row < subs[s].dim(); ++row) add_generators(next, carriers[c].modes, subs[s].basis().row(row));
          choice[c] = s;
          if (dfs(c + 1, next)) return true;
        }
        return false;
      };
      if (!dfs(0, Echelon(f, total))) return true;
      SumSearchHit h{r, {}};
      for (std::size_t c = 0; c < carriers.size(); ++c)
        h.spaces.push_back(comp[c] == 0 ? Subspace::zero(f, caps[c]) : cache.get(caps[c], comp[c])[choice[c]]);
      hit = std::move(h);
      return false;
    });
  }
  return hit;
}

inline Shape sub_shape(const Shape& shape, ModeMask mask, bool inside) {
  Shape s;
  for (std::size_t i = 0; i < shape.size(); ++i)
    if (((mask >> i & 1) != 0) == inside) s.push_back(shape[i]);
  return s;
}

/// Solves T = sum_P sum_{a in basis S_P} a (x) b_a for the b_a and checks the result.
inline DecompCert extract_certificate(const Tensor& t, DecompKind kind, const std::vector<Carrier>& carriers,
                                      const std::vector<Subspace>& spaces) {
  std::vector<SlicePart> parts;
  for (std::size_t c = 0; c < carriers.size(); ++c)
    if (spaces[c].dim() > 0) parts.push_back({carriers[c].modes, spaces[c]});
  const Matrix g = slice_sum_generators(t.field(), t.shape(), parts);
  const auto x = solve_row_combination(g, t.entries());
  if (!x) throw verification_error("search hit does not contain the tensor");
  DecompCert cert{kind, t.field(), t.shape(), {}};
  std::size_t row = 0;
  const std::size_t total = t.size();
  for (const auto& part : parts) {
    const std::size_t nc = total / part.space.ambient_dim();
    for (std::size_t i = 0; i < part.space.dim(); ++i) {
      std::vector<FieldElem> b(x->begin() + static_cast<std::ptrdiff_t>(row),
                               x->begin() + static_cast<std::ptrdiff_t>(row + nc));
      row += nc;
      cert.terms.push_back({part.modes, Tensor(t.field(), sub_shape(t.shape(), part.modes, true), part.space.basis().row(i)),
                            Tensor(t.field(), sub_shape(t.shape(), part.modes, false), std::move(b)), {}});
    }
  }
  if (!cert.verify(t)) throw verification_error(std::string(kind_name(kind)) + " certificate failed reconstruction");
  return cert;
}

inline void check_slice_guard(const Shape& shape, const Field& f, const SearchGuard& g) {
  if (f.q() > g.max_q) throw guard_error("slice search limited to q <= " + std::to_string(g.max_q));
  for (auto n : shape)
    if (n > g.max_mode_dim) throw guard_error("slice search limited to mode dimensions <= " + std::to_string(g.max_mode_dim));
}

inline std::vector<Carrier> singleton_carriers(const Shape& shape) {
  std::vector<Carrier> c;
  for (std::size_t i = 0; i < shape.size(); ++i) c.push_back({ModeMask{1} << i, shape[i]});
  return c;
}

}  // namespace detail

/// Exact slice rank with a slice decomposition certificate.
inline RankResult slice_rank(const Tensor& t, const SearchGuard& guard = {}) {
  t.require_order_at_least_2();
  detail::check_slice_guard(t.shape(), t.field(), guard);
  const auto carriers = detail::singleton_carriers(t.shape());
  std::size_t upper = *std::min_element(t.shape().begin(), t.shape().end());
  detail::SubspaceCache cache(t.field());
  const auto hit = detail::singleton_sum_search({t}, t.field(), carriers, upper, cache);
  if (!hit) throw error("slice search exhausted without a decomposition");
  return {hit->value, detail::extract_certificate(t, DecompKind::slice, carriers, hit->spaces)};
}

enum class MembershipEngine { automatic, generic };

struct PartitionOptions {
  SearchGuard guard{};
  MembershipEngine engine = MembershipEngine::automatic;
  /// When set, the bipartition that isolates this mode is not allowed (used for partition rank
  /// over a subfield, where the mode holds extension coordinates).
  std::optional<std::size_t> excluded_singleton;
};

/// The bipartitions {P, P^c} a partition search ranges over, each with its carrier side:
/// the singleton side if there is one, otherwise the side with the smaller flattened size.
inline std::vector<detail::Carrier> partition_carriers(const Shape& shape, std::optional<std::size_t> excluded = {}) {
  const std::size_t d = shape.size();
  const ModeMask all = (ModeMask{1} << d) - 1;
  std::vector<detail::Carrier> out;
  // masks without the top mode enumerate bipartitions up to complement
  for (ModeMask m = 1; m < (ModeMask{1} << (d - 1)); ++m) {
    const ModeMask c = all & ~m;
    if (excluded && (m == (ModeMask{1} << *excluded) || c == (ModeMask{1} << *excluded))) continue;
    const std::size_t pm = mask_product(shape, m), pc = mask_product(shape, c);
    ModeMask carrier;
    if (std::popcount(m) == 1 && std::popcount(c) == 1)
      carrier = pm <= pc ? m : c;
    else if (std::popcount(m) == 1)
      carrier = m;
    else if (std::popcount(c) == 1)
      carrier = c;
    else
      carrier = pm <= pc ? m : c;
    out.push_back({carrier, mask_product(shape, carrier)});
  }
  return out;
}

/// Exact partition rank with a partition decomposition certificate.
inline RankResult partition_rank(const Tensor& t, const PartitionOptions& opt = {}) {
  t.require_order_at_least_2();
  if (t.order() > 8) throw guard_error("partition search limited to order <= 8");
  const auto carriers = partition_carriers(t.shape(), opt.excluded_singleton);
  bool all_singletons = true;
  for (const auto& c : carriers) {
    if (c.size > opt.guard.max_part_size)
      throw guard_error("partition search limited to carrier sides of size <= " + std::to_string(opt.guard.max_part_size));
    all_singletons &= std::popcount(c.modes) == 1;
  }
  // rank is at most the sum of all carrier sizes, and at most min n_i when singletons are allowed
  std::size_t upper = 0;
  for (const auto& c : carriers) upper += c.size;
  detail::SubspaceCache cache(t.field());
  std::optional<detail::SumSearchHit> hit;
  // the projection engine needs each mode to appear in at most one carrier
  ModeMask seen = 0;
  bool disjoint = true;
  for (const auto& c : carriers) {
    disjoint &= (seen & c.modes) == 0;
    seen |= c.modes;
  }
  if (opt.engine == MembershipEngine::automatic && all_singletons && disjoint)
    hit = detail::singleton_sum_search({t}, t.field(), carriers, upper, cache);
  else
    hit = detail::generic_sum_search({t}, t.field(), t.shape(), carriers, upper, cache);
  if (!hit) throw error("partition search exhausted without a decomposition");
  return {hit->value, detail::extract_certificate(t, DecompKind::partition, carriers, hit->spaces)};
}

/// Views a tensor over GF(q^l) as a tensor over GF(q) with one extra trailing mode of
/// size l holding coordinates in the basis 1, x, ..., x^{l-1}.
inline Tensor coordinate_tensor(const Tensor& s, const Extension& ext) {
  if (!(s.field() == ext.ext())) throw argument_error("tensor is not over the extension field");
  Shape shape = s.shape();
  shape.push_back(ext.degree());
  Tensor out(ext.base(), shape);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = ext.coords(s[i]);
    for (unsigned j = 0; j < ext.degree(); ++j) out[i * ext.degree() + j] = c[j];
  }
  return out;
}

/// Partition rank over the subfield GF(q) of a tensor S over GF(q^l): terms a (x) b (x) u with
/// a, b over GF(q) on a bipartition of the original modes and u in GF(q^l).
inline RankResult partition_rank_over_subfield(const Tensor& s, const Field& base, const PartitionOptions& opt = {}) {
  if (s.field().p() != base.p() || s.field().k() % base.k() != 0) throw argument_error("not a subfield");
  const Extension ext(base, s.field().k() / base.k());
  const Tensor ct = coordinate_tensor(s, ext);
  PartitionOptions o = opt;
  o.excluded_singleton = s.order();
  return partition_rank(ct, o);
}

namespace detail {

/// Normalised nonzero vectors of GF(q)^n (first nonzero entry 1), in code order.
inline std::vector<std::vector<FieldElem>> projective_points(std::size_t n, const Field& f) {
  std::vector<std::vector<FieldElem>> out;
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= f.q();
  for (std::uint64_t code = 1; code < total; ++code) {
    std::vector<FieldElem> v(n);
    std::uint64_t c = code;
    for (auto& x : v) {
      x = FieldElem{static_cast<std::uint32_t>(c % f.q())};
      c /= f.q();
    }
    std::size_t first = 0;
    while (v[first] == Field::zero()) ++first;
    if (v[first] == Field::one()) out.push_back(std::move(v));
  }
  return out;
}

inline std::vector<FieldElem> outer_product(const Field& f, const std::vector<std::vector<FieldElem>>& factors) {
  std::vector<FieldElem> out{Field::one()};
  for (const auto& v : factors) {
    std::vector<FieldElem> next;
    next.reserve(out.size() * v.size());
    for (auto x : out)
      for (auto y : v) next.push_back(f.mul(x, y));
    out = std::move(next);
  }
  return out;
}

/// Factors of a rank-one tensor: normalised vectors per mode with the scalar absorbed into mode 0.
inline std::optional<std::vector<std::vector<FieldElem>>> rank_one_factors(const Tensor& t) {
  const Field& f = t.field();
  std::vector<std::vector<FieldElem>> factors;
  for (std::size_t m = 0; m < t.order(); ++m) {
    Matrix fl = flatten(t, m);
    if (rank(fl) != 1) return std::nullopt;
    // any nonzero column, normalised
    for (std::size_t c = 0; c < fl.cols(); ++c) {
      std::vector<FieldElem> col(fl.rows());
      bool nz = false;
      for (std::size_t r = 0; r < fl.rows(); ++r) nz |= (col[r] = fl(r, c)) != Field::zero();
      if (!nz) continue;
      std::size_t first = 0;
      while (col[first] == Field::zero()) ++first;
      const FieldElem s = f.inv(col[first]);
      for (auto& x : col) x = f.mul(x, s);
      factors.push_back(std::move(col));
      break;
    }
  }
  const std::vector<FieldElem> unit = outer_product(f, factors);
  std::size_t i = 0;
  while (unit[i] == Field::zero()) ++i;
  const FieldElem lambda = f.mul(t[i], f.inv(unit[i]));
  for (auto& x : factors[0]) x = f.mul(x, lambda);
  if (outer_product(f, factors) != t.entries()) return std::nullopt;
  return factors;
}

inline DecompTerm cp_term(const Field& f, const Shape& shape, std::vector<std::vector<FieldElem>> factors) {
  DecompTerm term;
  term.modes = 1;
  term.a = Tensor(f, {shape[0]}, factors[0]);
  const std::vector<std::vector<FieldElem>> rest(factors.begin() + 1, factors.end());
  term.b = Tensor(f, Shape(shape.begin() + 1, shape.end()), outer_product(f, rest));
  term.factors = std::move(factors);
  return term;
}

}  // namespace detail

/// Number of projective rank-one tensors of the given shape: prod_i (q^{n_i} - 1) / (q - 1).
inline std::uint64_t projective_rank_one_count(const Shape& shape, std::uint64_t q) {
  std::uint64_t n = 1;
  for (auto d : shape) {
    std::uint64_t pts = 1;
    for (std::size_t i = 0; i < d; ++i) pts *= q;
    n *= (pts - 1) / (q - 1);
  }
  return n;
}

/// Exact cp-rank: the smallest r with T a sum of r rank-one tensors.
inline RankResult cp_rank(const Tensor& t, const SearchGuard& guard = {}) {
  t.require_order_at_least_2();
  const Field& f = t.field();
  const std::uint64_t n_points = projective_rank_one_count(t.shape(), f.q());
  if (n_points > guard.max_rank_one)
    throw guard_error("cp search over " + std::to_string(n_points) + " rank-one tensors exceeds the guard of " +
                      std::to_string(guard.max_rank_one));
  DecompCert cert{DecompKind::cp, f, t.shape(), {}};
  if (t.is_zero()) return {0, cert};

  // projective rank-one tensors, mode 0 outermost
  std::vector<std::vector<std::vector<FieldElem>>> pts;
  for (auto n : t.shape()) pts.push_back(detail::projective_points(n, f));
  std::vector<std::vector<std::vector<FieldElem>>> factor_lists;
  std::vector<std::vector<FieldElem>> rank_ones;
  std::vector<std::size_t> idx(t.order(), 0);
  while (true) {
    std::vector<std::vector<FieldElem>> fac;
    for (std::size_t m = 0; m < t.order(); ++m) fac.push_back(pts[m][idx[m]]);
    rank_ones.push_back(detail::outer_product(f, fac));
    factor_lists.push_back(std::move(fac));
    std::size_t m = t.order();
    while (m > 0 && ++idx[m - 1] == pts[m - 1].size()) idx[--m] = 0;
    if (m == 0) break;
  }

  std::size_t lower = 1;
  for (std::size_t m = 0; m < t.order(); ++m) lower = std::max(lower, rank(flatten(t, m)));
  std::vector<FieldElem> nonzero;
  for (auto x : f.elements())
    if (x != Field::zero()) nonzero.push_back(x);

  for (std::size_t r = lower;; ++r) {
    const std::size_t picks = r - 1;
    // guard on C(N, r-1) * (q-1)^{r-1}
    long double work = 1;
    for (std::size_t i = 0; i < picks; ++i)
      work *= static_cast<long double>(rank_ones.size() - i) / static_cast<long double>(i + 1) * static_cast<long double>(nonzero.size());
    if (work > static_cast<long double>(guard.max_combinations))
      throw guard_error("cp search at rank " + std::to_string(r) + " exceeds the combination guard");
    std::vector<std::size_t> comb(picks);
    for (std::size_t i = 0; i < picks; ++i) comb[i] = i;
    if (picks > rank_ones.size()) throw error("cp search exhausted");
    while (true) {
      std::vector<std::size_t> sc(picks, 0);
      while (true) {
        std::vector<FieldElem> resid = t.entries();
        for (std::size_t i = 0; i < picks; ++i) {
          const FieldElem ns = f.neg(nonzero[sc[i]]);
          const auto& ro = rank_ones[comb[i]];
          for (std::size_t e = 0; e < resid.size(); ++e)
            if (ro[e] != Field::zero()) resid[e] = f.add(resid[e], f.mul(ns, ro[e]));
        }
        const Tensor rt(f, t.shape(), resid);
        if (!rt.is_zero()) {
          if (auto last = detail::rank_one_factors(rt)) {
            for (std::size_t i = 0; i < picks; ++i) {
              auto fac = factor_lists[comb[i]];
              for (auto& x : fac[0]) x = f.mul(x, nonzero[sc[i]]);
              cert.terms.push_back(detail::cp_term(f, t.shape(), std::move(fac)));
            }
            cert.terms.push_back(detail::cp_term(f, t.shape(), std::move(*last)));
            if (!cert.verify(t)) throw verification_error("cp certificate failed reconstruction");
            return {r, cert};
          }
        }
        std::size_t i = 0;
        while (i < picks && ++sc[i] == nonzero.size()) sc[i++] = 0;
        if (i == picks) break;
      }
      // next combination
      std::size_t i = picks;
      while (i > 0 && comb[i - 1] == rank_ones.size() - picks + i - 1) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t j = i; j < picks; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
}

/// Searches for Id_s <= T and returns the first certificate in enumeration order, or nullopt.
/// Id_s is fixed by permuting and rescaling rows (compensated on the other modes), so M_1 ranges
/// over s distinct normalised rows in increasing order; M_2..M_{d-1} are enumerated exhaustively
/// and M_d is solved for.
inline std::optional<RestrictionCert> subrank_at_least(const Tensor& t, std::size_t s, const SearchGuard& guard = {}) {
  t.require_order_at_least_2();
  const Field& f = t.field();
  const std::size_t d = t.order();
  std::size_t sum_n = 0;
  for (auto n : t.shape()) sum_n += n;
  {
    long double space = 1;
    for (std::size_t i = 0; i < s * sum_n; ++i) space *= static_cast<long double>(f.q());
    if (space > static_cast<long double>(guard.max_subrank_space))
      throw guard_error("subrank search space q^(s * sum n) exceeds the guard");
  }
  const Tensor target = identity_tensor(s, d, f);
  if (s == 0) {
    MatrixTuple m;
    for (std::size_t i = 0; i < d; ++i) m.mats.push_back(Matrix(f, 0, t.dim(i)));
    return RestrictionCert{m, t, Tensor(f, Shape(d, 0))};
  }
  const auto rows = detail::projective_points(t.dim(0), f);
  if (rows.size() < s) return std::nullopt;
  std::size_t free_entries = 0;
  for (std::size_t i = 1; i + 1 < d; ++i) free_entries += s * t.dim(i);
  const Matrix goal = flatten(target, d - 1);
  const auto q = static_cast<std::uint32_t>(f.q());
  std::vector<std::size_t> comb(s);
  for (std::size_t i = 0; i < s; ++i) comb[i] = i;
  while (true) {
    Matrix m1(f, s, t.dim(0));
    for (std::size_t r = 0; r < s; ++r)
      for (std::size_t c = 0; c < t.dim(0); ++c) m1(r, c) = rows[comb[r]][c];
    if (rank(m1) == s) {
      const Tensor first = mode_product(t, 0, m1);
      std::vector<std::uint32_t> digits(free_entries, 0);
      while (true) {
        MatrixTuple m;
        m.mats.push_back(m1);
        std::size_t pos = 0;
        bool viable = true;
        for (std::size_t i = 1; i + 1 < d; ++i) {
          Matrix mi(f, s, t.dim(i));
          for (std::size_t r = 0; r < s; ++r)
            for (std::size_t c = 0; c < t.dim(i); ++c) mi(r, c) = FieldElem{digits[pos++]};
          if (rank(mi) < s) viable = false;  // Id_s needs every M_i of full row rank
          m.mats.push_back(std::move(mi));
        }
        if (viable) {
          Tensor cur = first;
          for (std::size_t i = 1; i + 1 < d; ++i) cur = mode_product(cur, i, m.mats[i]);
          if (auto md = solve_left(flatten(cur, d - 1), goal)) {
            m.mats.push_back(std::move(*md));
            RestrictionCert cert{m, t, target};
            if (!cert.verify()) throw verification_error("subrank certificate failed re-check");
            return cert;
          }
        }
        std::size_t i = 0;
        while (i < free_entries && ++digits[i] == q) digits[i++] = 0;
        if (i == free_entries) break;
      }
    }
    std::size_t i = s;
    while (i > 0 && comb[i - 1] == rows.size() - s + i - 1) --i;
    if (i == 0) break;
    ++comb[i - 1];
    for (std::size_t j = i; j < s; ++j) comb[j] = comb[j - 1] + 1;
  }
  return std::nullopt;
}

struct SubspaceSliceRank {
  std::size_t value = 0;
  std::vector<Subspace> witness;  ///< U_1, ..., U_d with <W, U_1 (x) ... (x) U_d> = 0
};

/// Checks <w, u_1 (x) ... (x) u_d> = 0 for every basis tensor w of W and every tuple of basis vectors u_i of U_i.
inline bool verify_subspace_witness(const TensorSubspace& w, const std::vector<Subspace>& u) {
  if (u.size() != w.order()) return false;
  std::size_t sum_codim = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i].ambient_dim() != w.shape()[i]) return false;
    sum_codim += u[i].codim();
  }
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i].dim() == 0) return true;  // no functional tuples to test
  for (const auto& t : w.basis()) {
    std::vector<std::size_t> idx(u.size(), 0);
    while (true) {
      std::vector<std::vector<FieldElem>> fs;
      for (std::size_t i = 0; i < u.size(); ++i) fs.push_back(u[i].basis().row(idx[i]));
      if (evaluate(t, fs) != Field::zero()) return false;
      std::size_t i = u.size();
      while (i > 0 && ++idx[i - 1] == u[i - 1].dim()) idx[--i] = 0;
      if (i == 0) break;
    }
  }
  (void)sum_codim;
  return true;
}

/// SR(W) = min sum_i codim U_i over tuples with <W, U_1 (x) ... (x) U_d> = 0.
/// Searched through A_i = U_i^perp: W must lie in sum_i A_i (x) V_rest.
inline SubspaceSliceRank sr_subspace(const TensorSubspace& w, const SearchGuard& guard = {}) {
  if (w.order() < 2) throw argument_error("tensor subspaces must have order >= 2");
  detail::check_slice_guard(w.shape(), w.field(), guard);
  const auto carriers = detail::singleton_carriers(w.shape());
  const std::size_t upper = *std::min_element(w.shape().begin(), w.shape().end());
  detail::SubspaceCache cache(w.field());
  const auto hit = detail::singleton_sum_search(w.basis(), w.field(), carriers, upper, cache);
  if (!hit) throw error("subspace slice search exhausted");
  SubspaceSliceRank out{hit->value, {}};
  for (const auto& a : hit->spaces) out.witness.push_back(annihilator(a));
  if (!verify_subspace_witness(w, out.witness)) throw verification_error("subspace slice witness failed re-check");
  return out;
}

struct SubspaceSliceRankK {
  std::size_t value = 0;
  std::vector<std::vector<FieldElem>> coefficients;  ///< a maximising k-dim subspace, as combinations of W's basis
};

/// SR_k(W) = max of SR(V) over k-dimensional subspaces V of W.
inline SubspaceSliceRankK sr_k_subspace(const TensorSubspace& w, std::size_t k, const SearchGuard& guard = {}) {
  if (k > w.dim()) throw argument_error("k exceeds dim W");
  const std::uint64_t count = gaussian_binomial(w.dim(), k, w.field().q());
  if (count > guard.max_subspaces)
    throw guard_error(std::to_string(count) + " subspaces of dimension " + std::to_string(k) + " exceed the guard");
  SubspaceSliceRankK best;
  bool first = true;
  for_each_subspace_of_dim(w.dim(), w.field(), k, [&](const Subspace& c) {
    std::vector<Tensor> basis;
    std::vector<std::vector<FieldElem>> coeffs;
    for (std::size_t i = 0; i < c.dim(); ++i) {
      coeffs.push_back(c.basis().row(i));
      basis.push_back(w.combination(coeffs.back()));
    }
    const std::size_t v = sr_subspace(TensorSubspace(w.field(), w.shape(), std::move(basis)), guard).value;
    if (first || v > best.value) {
      best = {v, coeffs};
      first = false;
    }
    return true;
  });
  return best;
}

}  // namespace tenrank
