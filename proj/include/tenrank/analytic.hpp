#pragma once

// Analytic rank by exact zero counting and by the character sum, and the
// geometric rank estimate from zero counts over a tower of extensions.
//
// For a mode k, Z_k(T) is the set of functional tuples (f_i)_{i != k} whose
// contraction with T vanishes, and AR(T) = m - log_q |Z_k(T)| with
// m = sum_{i != k} n_i. The count is kept as an exact integer.

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tenrank/errors.hpp"
#include "tenrank/gf.hpp"
#include "tenrank/linalg.hpp"
#include "tenrank/parallel.hpp"
#include "tenrank/tensor.hpp"

namespace tenrank {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr std::uint64_t kDefaultBudget = std::uint64_t{1} << 34;

/// log base q of a positive integer.
inline long double log_q(const BigInt& n, std::uint64_t q) {
  if (n <= 0) throw argument_error("logarithm of a non-positive count");
  // scale down huge values so the conversion cannot overflow
  const std::size_t bits = boost::multiprecision::msb(n);
  if (bits < 1000) return std::log(n.convert_to<long double>()) / std::log(static_cast<long double>(q));
  const std::size_t shift = bits - 64;
  const BigInt top = n >> shift;
  return (std::log(top.convert_to<long double>()) + static_cast<long double>(shift) * std::log(2.0L)) /
         std::log(static_cast<long double>(q));
}

inline BigInt big_pow(std::uint64_t q, std::size_t e) {
  BigInt r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= q;
  return r;
}

/// Throws guard_error unless q^e <= budget.
inline void check_budget(std::uint64_t q, std::size_t e, std::uint64_t budget, const std::string& what) {
  if (big_pow(q, e) > budget)
    throw guard_error(what + " needs " + std::to_string(q) + "^" + std::to_string(e) + " points, over the budget of " +
                      std::to_string(budget));
}

struct ARExact {
  std::uint64_t q = 0;
  std::size_t m = 0;  ///< sum of n_i over i != k
  std::size_t k = 0;
  BigInt zero_count;

  long double value() const { return static_cast<long double>(m) - log_q(zero_count, q); }
};

namespace detail {

inline std::uint64_t checked_pow(std::uint64_t q, std::size_t e) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < e; ++i) {
    if (r > std::numeric_limits<std::uint64_t>::max() / q) throw guard_error("enumeration size overflows 64 bits");
    r *= q;
  }
  return r;
}

}  // namespace detail

/// |Z_k(T)| by enumerating functionals on every mode except k and one other mode j,
/// and counting the f_j killing the resulting n_j x n_k matrix: q^{n_j - rank}.
inline ARExact analytic_rank_zero_count(const Tensor& t, std::size_t k, std::uint64_t budget = kDefaultBudget,
                                        unsigned threads = 1) {
  t.require_order_at_least_2();
  const std::size_t d = t.order();
  if (k >= d) throw argument_error("mode " + std::to_string(k) + " out of range");
  const Field& f = t.field();
  const std::uint64_t q = f.q();
  std::size_t m = 0;
  for (std::size_t i = 0; i < d; ++i)
    if (i != k) m += t.dim(i);
  check_budget(q, m, budget, "zero count");

  std::size_t j = k == 0 ? 1 : 0;
  for (std::size_t i = 0; i < d; ++i)
    if (i != k && t.dim(i) > t.dim(j)) j = i;
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < d; ++i)
    if (i != k && i != j) others.push_back(i);

  const std::size_t nj = t.dim(j), nk = t.dim(k);
  std::size_t n_other = 1, s = 0;
  for (auto i : others) {
    n_other *= t.dim(i);
    s += t.dim(i);
  }
  // layout [o][a][b]: o over the other modes (row-major), a over mode j, b over mode k
  std::vector<FieldElem> tp(n_other * nj * nk);
  std::vector<std::vector<std::size_t>> odig(n_other);  // position of each other-mode coordinate in the digit vector
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    const auto idx = t.multi_index(flat);
    std::size_t o = 0;
    for (auto i : others) o = o * t.dim(i) + idx[i];
    tp[(o * nj + idx[j]) * nk + idx[k]] = t[flat];
  }
  for (std::size_t o = 0; o < n_other; ++o) {
    std::size_t rest = o, offset = s;
    odig[o].resize(others.size());
    for (std::size_t pos = others.size(); pos-- > 0;) {
      const std::size_t n = t.dim(others[pos]);
      offset -= n;
      odig[o][pos] = offset + rest % n;
      rest /= n;
    }
  }
  std::vector<unsigned __int128> qpow(nj + 1, 1);
  for (std::size_t i = 1; i <= nj; ++i) qpow[i] = qpow[i - 1] * q;

  const std::uint64_t tuples = detail::checked_pow(q, s);
  auto block = [&](std::uint64_t lo, std::uint64_t hi) -> unsigned __int128 {
    unsigned __int128 acc = 0;
    std::vector<std::uint32_t> digits(s);
    std::uint64_t v = lo;
    for (auto& dg : digits) {
      dg = static_cast<std::uint32_t>(v % q);
      v /= q;
    }
    std::vector<FieldElem> w(n_other);
    Matrix mat(f, nj, nk);
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      for (std::size_t o = 0; o < n_other; ++o) {
        FieldElem prod = Field::one();
        for (auto pos : odig[o]) {
          prod = f.mul(prod, FieldElem{digits[pos]});
          if (prod == Field::zero()) break;
        }
        w[o] = prod;
      }
      mat = Matrix(f, nj, nk);
      for (std::size_t o = 0; o < n_other; ++o) {
        if (w[o] == Field::zero()) continue;
        const FieldElem* src = &tp[o * nj * nk];
        for (std::size_t a = 0; a < nj; ++a)
          for (std::size_t b = 0; b < nk; ++b)
            if (src[a * nk + b] != Field::zero()) mat(a, b) = f.add(mat(a, b), f.mul(w[o], src[a * nk + b]));
      }
      acc += qpow[nj - rank(mat)];
      for (std::size_t i = 0; i < s && ++digits[i] == q; ++i) digits[i] = 0;
    }
    return acc;
  };
  const unsigned __int128 total = parallel_reduce(tuples, threads, static_cast<unsigned __int128>(0), block);
  BigInt count = static_cast<std::uint64_t>(total >> 64);
  count <<= 64;
  count += static_cast<std::uint64_t>(total);
  return {q, m, k, count};
}

/// Histogram of prime-field trace values, combinable by addition.
struct TraceHistogram {
  std::vector<std::uint64_t> counts;
  TraceHistogram& operator+=(const TraceHistogram& o) {
    if (counts.size() < o.counts.size()) counts.resize(o.counts.size(), 0);
    for (std::size_t i = 0; i < o.counts.size(); ++i) counts[i] += o.counts[i];
    return *this;
  }
};

/// Exact histogram of Tr(scale * T(f_1, ..., f_d)) over every functional tuple.
inline TraceHistogram character_histogram(const Tensor& t, FieldElem scale, std::uint64_t budget, unsigned threads) {
  t.require_order_at_least_2();
  const Field& f = t.field();
  if (scale == Field::zero() || !f.contains(scale)) throw argument_error("character scale must be a nonzero field element");
  const std::uint64_t q = f.q();
  const std::size_t d = t.order();
  std::size_t total_dim = 0;
  for (auto n : t.shape()) total_dim += n;
  check_budget(q, total_dim, budget, "character sum");

  // outer enumeration over the first d-1 modes, explicit inner loop over the last
  const std::size_t nd = t.dim(d - 1);
  const std::size_t outer_dim = total_dim - nd;
  const std::size_t n_outer = nd == 0 ? 0 : t.size() / nd;
  std::vector<std::vector<std::size_t>> odig(n_outer);
  for (std::size_t o = 0; o < n_outer; ++o) {
    const auto idx = t.multi_index(o * nd);
    std::size_t offset = 0;
    for (std::size_t i = 0; i + 1 < d; ++i) {
      odig[o].push_back(offset + idx[i]);
      offset += t.dim(i);
    }
  }
  const std::uint64_t outer = detail::checked_pow(q, outer_dim);
  const std::uint64_t inner = detail::checked_pow(q, nd);
  auto block = [&](std::uint64_t lo, std::uint64_t hi) {
    TraceHistogram h;
    h.counts.assign(f.p(), 0);
    std::vector<std::uint32_t> digits(outer_dim);
    std::uint64_t v = lo;
    for (auto& dg : digits) {
      dg = static_cast<std::uint32_t>(v % q);
      v /= q;
    }
    std::vector<FieldElem> vec(nd), fd(nd);
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      std::fill(vec.begin(), vec.end(), Field::zero());
      for (std::size_t o = 0; o < n_outer; ++o) {
        FieldElem w = Field::one();
        for (auto pos : odig[o]) w = f.mul(w, FieldElem{digits[pos]});
        if (w == Field::zero()) continue;
        for (std::size_t c = 0; c < nd; ++c) vec[c] = f.add(vec[c], f.mul(w, t[o * nd + c]));
      }
      std::fill(fd.begin(), fd.end(), Field::zero());
      for (std::uint64_t g = 0; g < inner; ++g) {
        FieldElem val = Field::zero();
        for (std::size_t c = 0; c < nd; ++c) val = f.add(val, f.mul(vec[c], fd[c]));
        ++h.counts[f.trace(f.mul(scale, val)).code];
        for (std::size_t c = 0; c < nd && (fd[c] = FieldElem{fd[c].code + 1}).code == q; ++c) fd[c] = Field::zero();
      }
      for (std::size_t i = 0; i < outer_dim && ++digits[i] == q; ++i) digits[i] = 0;
    }
    return h;
  };
  TraceHistogram init;
  init.counts.assign(f.p(), 0);
  return parallel_reduce(outer, threads, init, block);
}

/// AR = -log_q( q^{-sum n_i} * sum over all tuples of chi(scale * T(f_1, ..., f_d)) ).
inline long double analytic_rank_char(const Tensor& t, std::uint64_t budget = kDefaultBudget, unsigned threads = 1,
                                      FieldElem scale = Field::one()) {
  const TraceHistogram h = character_histogram(t, scale, budget, threads);
  const std::uint64_t p = t.field().p();
  std::complex<long double> sum = 0;
  for (std::uint64_t v = 0; v < h.counts.size(); ++v) {
    const long double angle = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(v) / static_cast<long double>(p);
    sum += static_cast<long double>(h.counts[v]) * std::complex<long double>(std::cos(angle), std::sin(angle));
  }
  if (sum.real() <= 0) throw error("character sum is not positive");
  std::size_t total_dim = 0;
  for (auto n : t.shape()) total_dim += n;
  return static_cast<long double>(total_dim) - std::log(sum.real()) / std::log(static_cast<long double>(t.field().q()));
}

struct GRLevel {
  unsigned l;
  BigInt zero_count;  ///< |Z_k(T)| over GF(q^l)
  /// m - log_{q^l}(count), the analytic rank of the base-changed tensor
  long double ar(std::uint64_t q, std::size_t m) const {
    return static_cast<long double>(m) - log_q(zero_count, q) / static_cast<long double>(l);
  }
};

struct GREstimate {
  std::uint64_t q = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::vector<GRLevel> levels;
  long double log_ratio = 0;  ///< log_q(count_L / count_{L-1})
  long long dim_estimate = 0;
  long long gr = 0;
  long double residual = 0;

  bool conclusive() const { return residual < 0.5L; }
};

/// The ratio rule applied to levels l-1 and l. The leading constant of the count changes when
/// top-dimensional components become rational, so windows can disagree at small l.
struct GRWindow {
  unsigned l = 0;
  long double log_ratio = 0;
  long long gr = 0;
  long double residual = 0;
};

inline std::vector<GRWindow> gr_windows(const GREstimate& e) {
  std::vector<GRWindow> out;
  for (std::size_t i = 1; i < e.levels.size(); ++i) {
    GRWindow w;
    w.l = e.levels[i].l;
    w.log_ratio = log_q(e.levels[i].zero_count, e.q) - log_q(e.levels[i - 1].zero_count, e.q);
    const long long dim = std::llround(w.log_ratio);
    w.gr = static_cast<long long>(e.m) - dim;
    w.residual = std::fabs(w.log_ratio - static_cast<long double>(dim));
    out.push_back(w);
  }
  return out;
}

/// Raised when the last two levels do not pin the dimension down; carries the estimate.
class inconclusive_error : public error {
 public:
  inconclusive_error(const std::string& what, GREstimate est) : error(what), estimate_(std::move(est)) {}
  const GREstimate& estimate() const { return estimate_; }

 private:
  GREstimate estimate_;
};

/// Counts Z_k over GF(q^l) for l = 1..l_max and reads off dim Z_k from the last ratio.
inline GREstimate geometric_rank_estimate(const Tensor& t, std::size_t k, unsigned l_max,
                                          std::uint64_t budget = kDefaultBudget, unsigned threads = 1) {
  if (l_max < 2) throw argument_error("l_max must be at least 2");
  t.require_order_at_least_2();
  if (k >= t.order()) throw argument_error("mode out of range");
  GREstimate est;
  est.q = t.field().q();
  est.k = k;
  for (std::size_t i = 0; i < t.order(); ++i)
    if (i != k) est.m += t.dim(i);
  // check every level up front so a budget failure costs nothing
  for (unsigned l = 1; l <= l_max; ++l) check_budget(detail::checked_pow(est.q, l), est.m, budget, "level " + std::to_string(l));
  for (unsigned l = 1; l <= l_max; ++l) {
    const Tensor native = l == 1 ? t : embed_tensor(t, Extension(t.field(), l));
    est.levels.push_back({l, analytic_rank_zero_count(native, k, budget, threads).zero_count});
  }
  const BigInt& hi = est.levels[l_max - 1].zero_count;
  const BigInt& lo = est.levels[l_max - 2].zero_count;
  est.log_ratio = log_q(hi, est.q) - log_q(lo, est.q);
  est.dim_estimate = std::llround(est.log_ratio);
  est.gr = static_cast<long long>(est.m) - est.dim_estimate;
  est.residual = std::fabs(est.log_ratio - static_cast<long double>(est.dim_estimate));
  if (!est.conclusive())
    throw inconclusive_error("geometric rank estimate inconclusive: residual " + std::to_string(static_cast<double>(est.residual)) +
                                 " >= 0.5, raise l_max",
                             est);
  return est;
}

}  // namespace tenrank
