// tenrank: command-line front end for the rank workbench.
//
// Exit codes: 0 success, 1 usage or parse error, 2 guard or budget exceeded,
// 3 certificate or identity failed re-check, 4 audit found a violated inequality,
// 5 geometric rank estimate inconclusive.

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "tenrank/tenrank.hpp"

using namespace tenrank;

namespace {

enum Exit { kOk = 0, kUsage = 1, kGuard = 2, kVerify = 3, kViolation = 4, kInconclusive = 5 };

struct Common {
  unsigned threads = 0;
  std::uint64_t budget = kDefaultBudget;
  std::string format = "json";
};

/// Result of one command: exact fields plus what the report header needs.
struct Outcome {
  json results = json::object();
  std::string status = "ok";
  int code = kOk;
  json rng = nullptr;
};

class violation : public error {
 public:
  violation(const std::string& what, json dump) : error(what), dump_(std::move(dump)) {}
  const json& dump() const { return dump_; }

 private:
  json dump_;
};

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::string out;
  char buf[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    out += buf;
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json ar_json(const ARExact& a) {
  return {{"mode", a.k}, {"q", a.q}, {"m", a.m}, {"zero_count", a.zero_count.str()}, {"ar", decimal12(static_cast<double>(a.value()))}};
}

json windows_json(const GREstimate& e) {
  json out = json::array();
  for (const auto& w : gr_windows(e))
    out.push_back({{"l", w.l}, {"gr", w.gr}, {"residual", decimal12(static_cast<double>(w.residual))}});
  return out;
}

json gr_json(const GREstimate& e) {
  json levels = json::array();
  for (const auto& lv : e.levels)
    levels.push_back({{"l", lv.l}, {"zero_count", lv.zero_count.str()}, {"ar", decimal12(static_cast<double>(lv.ar(e.q, e.m)))}});
  return {{"mode", e.k},
          {"q", e.q},
          {"m", e.m},
          {"levels", levels},
          {"log_ratio", decimal12(static_cast<double>(e.log_ratio))},
          {"dim_estimate", e.dim_estimate},
          {"gr", e.gr},
          {"residual", decimal12(static_cast<double>(e.residual))},
          {"conclusive", e.conclusive()},
          {"windows", windows_json(e)}};
}

json rank_json(const RankResult& r, const Tensor& t) {
  return {{"value", r.value}, {"certificate_verified", r.cert.verify(t)}, {"certificate", decomp_to_json(r.cert)}};
}

unsigned workers(const Common& c) { return c.threads == 0 ? default_threads() : c.threads; }

// ---- commands ----

Outcome cmd_ar(const Common& c, const std::string& file, std::vector<std::size_t> modes, bool char_check) {
  const Tensor t = load_tensor(file);
  if (modes.empty())
    for (std::size_t k = 0; k < t.order(); ++k) modes.push_back(k);
  Outcome o;
  o.results["shape"] = t.shape();
  o.results["field"] = field_to_json(t.field());
  json per = json::array();
  std::vector<long double> values;
  for (auto k : modes) {
    const auto a = analytic_rank_zero_count(t, k, c.budget, workers(c));
    values.push_back(a.value());
    per.push_back(ar_json(a));
  }
  o.results["modes"] = per;
  if (char_check) {
    const long double ch = analytic_rank_char(t, c.budget, workers(c));
    long double worst = 0;
    for (auto v : values) worst = std::max(worst, std::fabs(v - ch));
    o.results["char_check"] = {{"ar", decimal12(static_cast<double>(ch))},
                               {"max_discrepancy", decimal12(static_cast<double>(worst))},
                               {"agrees", worst < 1e-9L}};
    if (worst >= 1e-9L) throw verification_error("character-sum and zero-count routes disagree");
  }
  return o;
}

Outcome cmd_gr(const Common& c, const std::string& file, std::optional<std::size_t> mode, unsigned l_max) {
  const Tensor t = load_tensor(file);
  const std::size_t k = mode.value_or(t.order() - 1);
  Outcome o;
  try {
    o.results = gr_json(geometric_rank_estimate(t, k, l_max, c.budget, workers(c)));
  } catch (const inconclusive_error& e) {
    o.results = gr_json(e.estimate());
    o.status = "inconclusive";
    o.code = kInconclusive;
  }
  return o;
}

Outcome cmd_rank(const std::string& file, const std::string& kind, std::optional<std::size_t> subrank, bool generic) {
  const Tensor t = load_tensor(file);
  if (kind.empty() && !subrank) throw argument_error("give --kind and/or --subrank");
  Outcome o;
  o.results["shape"] = t.shape();
  o.results["field"] = field_to_json(t.field());
  if (kind == "slice") {
    o.results["slice"] = rank_json(slice_rank(t), t);
  } else if (kind == "partition") {
    PartitionOptions opt;
    if (generic) opt.engine = MembershipEngine::generic;
    o.results["partition"] = rank_json(partition_rank(t, opt), t);
  } else if (kind == "cp") {
    o.results["cp"] = rank_json(cp_rank(t), t);
  }
  if (subrank) {
    const auto cert = subrank_at_least(t, *subrank);
    o.results["subrank"] = {{"s", *subrank},
                            {"holds", cert.has_value()},
                            {"certificate", cert ? restriction_to_json(*cert) : json(nullptr)}};
  }
  return o;
}

Outcome cmd_stability(const Common& c, const std::string& file, unsigned l) {
  const Tensor t = load_tensor(file);
  if (l < 1) throw argument_error("--l must be at least 1");
  const std::size_t k = t.order() - 1;
  const auto base = analytic_rank_zero_count(t, k, c.budget, workers(c));
  const auto bc = base_change(t, l);
  const auto native = analytic_rank_zero_count(bc.native, k, c.budget, workers(c));
  const auto kron = analytic_rank_zero_count(bc.kron, k, c.budget, workers(c));
  const bool holds = native.zero_count == kron.zero_count && native.m * l == kron.m;
  Outcome o;
  o.results = {{"l", l},
               {"base", ar_json(base)},
               {"native", ar_json(native)},
               {"kron", ar_json(kron)},
               {"l_times_native_ar", decimal12(static_cast<double>(l * native.value()))},
               {"identity_holds", holds},
               {"ratio_native_over_base",
                base.value() > 0 ? json(decimal12(static_cast<double>(native.value() / base.value()))) : json(nullptr)},
               {"constants", "c(d,q) and C(d,q) are not computed"}};
  if (!holds) throw verification_error("l * AR(native) != AR(kron) at the count level");
  return o;
}

/// #{(A, B) : AB = 0} over GF(2^l) by direct enumeration of all pairs.
std::uint64_t matmul_pairs(std::size_t n, const Field& f, std::uint64_t budget, unsigned threads) {
  const std::size_t nn = n * n;
  check_budget(f.q(), 2 * nn, budget, "pair count");
  const std::uint64_t per = detail::checked_pow(f.q(), nn);
  auto decode = [&](std::uint64_t code, std::vector<FieldElem>& m) {
    for (auto& x : m) {
      x = FieldElem{static_cast<std::uint32_t>(code % f.q())};
      code /= f.q();
    }
  };
  return parallel_reduce<std::uint64_t>(per, threads, 0, [&](std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t cnt = 0;
    std::vector<FieldElem> a(nn), b(nn);
    for (std::uint64_t ia = lo; ia < hi; ++ia) {
      decode(ia, a);
      for (std::uint64_t ib = 0; ib < per; ++ib) {
        decode(ib, b);
        bool zero = true;
        for (std::size_t i = 0; i < n && zero; ++i)
          for (std::size_t j = 0; j < n && zero; ++j) {
            FieldElem s = Field::zero();
            for (std::size_t r = 0; r < n; ++r) s = f.add(s, f.mul(a[i * n + r], b[r * n + j]));
            zero = s == Field::zero();
          }
        cnt += zero;
      }
    }
    return cnt;
  });
}

Outcome cmd_matmul_table(const Common& c, std::size_t n, unsigned l_max) {
  if (n < 1) throw argument_error("--n must be at least 1");
  if (l_max < 1) throw argument_error("--lmax must be at least 1");
  const Field f2 = Field::make(2, 1);
  const Tensor t = matmul_tensor(n, f2);
  const std::size_t m = 2 * n * n;
  Outcome o;
  json rows = json::array();
  for (unsigned l = 1; l <= l_max; ++l) {
    const Extension ext(f2, l);
    const Tensor native = l == 1 ? t : embed_tensor(t, ext);
    const auto a = analytic_rank_zero_count(native, 2, c.budget, workers(c));
    const std::uint64_t pairs = matmul_pairs(n, ext.ext(), c.budget, workers(c));
    if (a.zero_count != pairs) throw verification_error("zero count and direct pair count differ at l = " + std::to_string(l));
    rows.push_back({{"l", l},
                    {"field_size", ext.ext().q()},
                    {"zero_count", a.zero_count.str()},
                    {"pair_count_direct", std::to_string(pairs)},
                    {"ar", decimal12(static_cast<double>(a.value()))},
                    {"log_pair_count", decimal12(static_cast<double>(log_q(a.zero_count, ext.ext().q())))}});
  }
  o.results["n"] = n;
  o.results["m"] = m;
  o.results["levels"] = rows;
  o.results["gr_lower_bound_ceil_3n2_over_4"] = (3 * n * n + 3) / 4;
  if (l_max >= 2) {
    try {
      o.results["gr_estimate"] = gr_json(geometric_rank_estimate(t, 2, l_max, c.budget, workers(c)));
    } catch (const inconclusive_error& e) {
      o.results["gr_estimate"] = gr_json(e.estimate());
    }
  }
  return o;
}

Field field_of_size(std::uint64_t q) {
  for (std::uint64_t p = 2; p <= q; ++p) {
    if (q % p) continue;
    unsigned k = 0;
    std::uint64_t r = q;
    while (r % p == 0) {
      r /= p;
      ++k;
    }
    if (r != 1) break;
    return Field::make(p, k);
  }
  throw argument_error("--q must be a prime power");
}

Outcome cmd_audit(const Common& c, const Shape& shape, std::uint64_t q, std::size_t count, std::uint64_t seed) {
  const Field f = field_of_size(q);
  if (shape.size() < 2) throw argument_error("--shape needs at least two modes");
  const std::size_t d = shape.size(), k = d - 1;
  std::mt19937_64 rng(seed);
  Outcome o;
  o.rng = {{"generator", "mt19937_64"}, {"seed", seed}};
  const Field ext = Field::make(f.p(), f.k() * 2);
  const std::size_t mult_rank = count > 0 ? cp_rank(mult_tensor(3, f, 2)).value : 0;
  json samples = json::array(), bad = json::array();
  std::size_t unresolved = 0;
  auto record = [&](json& checks, const std::string& name, bool holds, json detail, json dump) {
    detail["holds"] = holds;
    checks[name] = detail;
    if (!holds) bad.push_back({{"check", name}, {"detail", detail}, {"counterexample", dump}});
  };
  for (std::size_t i = 0; i < count; ++i) {
    const Tensor t = random_tensor(f, shape, rng), s = random_tensor(f, shape, rng);
    MatrixTuple mt;
    for (auto n : shape) mt.mats.push_back(random_matrix(f, n, n, rng));
    const Tensor sx = random_tensor(ext, shape, rng);
    json checks = json::object();
    const json dump_t = {{"T", tensor_to_json(t)}};

    const auto ar_t = analytic_rank_zero_count(t, k, c.budget, workers(c));
    const Tensor mtt = apply_matrices(mt, t);
    const auto ar_mt = analytic_rank_zero_count(mtt, k, c.budget, workers(c));
    json mats = json::array();
    for (const auto& mm : mt.mats) mats.push_back(matrix_to_json(mm));
    record(checks, "restriction_lowers_ar", ar_mt.zero_count >= ar_t.zero_count,
           {{"ar_T", decimal12(static_cast<double>(ar_t.value()))}, {"ar_MT", decimal12(static_cast<double>(ar_mt.value()))}},
           {{"T", tensor_to_json(t)}, {"matrices", mats}});

    const Tensor ts = direct_sum(t, s);
    const auto ar_s = analytic_rank_zero_count(s, k, c.budget, workers(c));
    const auto ar_ts = analytic_rank_zero_count(ts, k, c.budget, workers(c));
    record(checks, "ar_additive", ar_ts.zero_count == ar_t.zero_count * ar_s.zero_count,
           {{"count_T", ar_t.zero_count.str()}, {"count_S", ar_s.zero_count.str()}, {"count_sum", ar_ts.zero_count.str()}},
           {{"T", tensor_to_json(t)}, {"S", tensor_to_json(s)}});

    const std::size_t sr_t = slice_rank(t).value, sr_s = slice_rank(s).value, sr_ts = slice_rank(ts).value;
    record(checks, "sr_additive", sr_ts == sr_t + sr_s, {{"sr_T", sr_t}, {"sr_S", sr_s}, {"sr_sum", sr_ts}},
           {{"T", tensor_to_json(t)}, {"S", tensor_to_json(s)}});

    // GR <= PR: a contradiction counts only if every ratio window agrees on it
    const std::size_t pr_t = partition_rank(t).value;
    GREstimate est;
    try {
      est = geometric_rank_estimate(t, k, 4, c.budget, workers(c));
    } catch (const inconclusive_error& e) {
      est = e.estimate();
    }
    const auto wins = gr_windows(est);
    bool all_le = true, all_gt = true;
    for (const auto& w : wins) {
      const bool le = w.gr <= static_cast<long long>(pr_t);
      all_le &= le;
      all_gt &= !le && w.gr == wins.back().gr;
    }
    if (all_le || all_gt) {
      record(checks, "gr_le_pr", all_le, {{"gr", est.gr}, {"pr", pr_t}, {"windows", windows_json(est)}}, dump_t);
    } else {
      checks["gr_le_pr"] = {{"gr", est.gr}, {"pr", pr_t}, {"windows", windows_json(est)}, {"holds", nullptr},
                            {"note", "ratio windows disagree; unresolved at this l_max"}};
      ++unresolved;
    }

    const std::size_t r = partition_rank(sx).value;
    const std::size_t rk = partition_rank_over_subfield(sx, f).value;
    record(checks, "subfield_pr_sandwich", r <= rk && rk <= r * mult_rank,
           {{"pr_ext", r}, {"pr_base", rk}, {"mult_rank", mult_rank}}, {{"S", tensor_to_json(sx)}});

    const std::size_t pr_tt = partition_rank(direct_sum(t, t)).value;
    checks["direct_sum_ratio"] = {{"pr_T", pr_t}, {"pr_T_plus_T", pr_tt}, {"ratio", decimal12(pr_tt / 2.0)}};
    samples.push_back({{"index", i}, {"checks", checks}});
  }
  o.results["field"] = field_to_json(f);
  o.results["shape"] = shape;
  o.results["count"] = count;
  o.results["samples"] = samples;
  if (count > 0) {
    const Tensor id = identity_tensor(2, d, f);
    o.results["identity_probe"] = {{"pr_id2", partition_rank(id).value}, {"pr_id2_plus_id2", partition_rank(direct_sum(id, id)).value}};
  }
  o.results["unresolved_gr_checks"] = unresolved;
  o.results["all_hold"] = bad.empty();
  if (!bad.empty()) throw violation("audit found a violated inequality", {{"results", o.results}, {"violations", bad}});
  return o;
}

Outcome cmd_subspace(const std::string& file, std::optional<std::size_t> k, bool tw) {
  const TensorSubspace w = load_tensor_subspace(file);
  if (w.dim() == 0) throw parse_error("subspace basis is empty");
  Outcome o;
  const auto sr = sr_subspace(w);
  json wit = json::array();
  for (const auto& u : sr.witness) wit.push_back(subspace_to_json(u));
  o.results = {{"shape", w.shape()}, {"field", field_to_json(w.field())}, {"dim", w.dim()}};
  o.results["sr"] = {{"value", sr.value}, {"witness", wit}, {"witness_verified", verify_subspace_witness(w, sr.witness)}};
  json notes = json::array();
  notes.push_back("SR(W) <= (d/2 + 1) SR(W over the algebraic closure); the right side is not computed");
  if (k) {
    const auto srk = sr_k_subspace(w, *k);
    json coeffs = json::array();
    for (const auto& row : srk.coefficients) coeffs.push_back(detail::elems_to_json(row));
    o.results["sr_k"] = {{"k", *k}, {"value", srk.value}, {"maximiser_coefficients", coeffs}};
    if (w.order() == 2 && *k >= 1) o.results["sr_k"]["sr_le_2_sr_k"] = sr.value <= 2 * srk.value;
    if (w.order() >= 3) notes.push_back("for order >= 3 no constant C bounds SR(W) by C * SR_1(W)");
  }
  if (tw) {
    const Tensor t = tw_tensor(w);
    const auto r = slice_rank(t);
    o.results["tw"] = {{"shape", t.shape()}, {"sr", r.value}, {"matches_sr_w", r.value == sr.value}, {"certificate", decomp_to_json(r.cert)}};
  }
  o.results["annotations"] = notes;
  return o;
}

// ---- output ----

void flatten_csv(const json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten_csv(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten_csv(j[i], prefix + "." + std::to_string(i), out);
    if (j.empty()) out << prefix << ",\n";
  } else {
    std::string v = j.is_string() ? j.get<std::string>() : j.dump();
    if (v.find_first_of(",\"") != std::string::npos) {
      std::string q = "\"";
      for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      v = q + "\"";
    }
    out << prefix << "," << v << "\n";
  }
}

void emit(const json& report, const std::string& format) {
  if (format == "csv") {
    std::cout << "key,value\n";
    flatten_csv(report, "", std::cout);
  } else {
    std::cout << report.dump(2) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact tensor ranks over finite fields"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--threads", common.threads, "worker count (0 = all cores)");
  app.add_option("--budget", common.budget, "cap on enumerated points per count");
  app.add_option("--format", common.format, "report format")->check(CLI::IsMember({"json", "csv"}));

  std::string file;
  std::vector<std::size_t> modes;
  std::optional<std::size_t> mode, subrank, k;
  bool char_check = false, generic = false, tw = false;
  unsigned l_max = 3, l = 2;
  std::string kind;
  std::size_t n = 2, count = 25;
  std::uint64_t q = 2, seed = 1;
  Shape shape{2, 2, 2};

  auto* ar = app.add_subcommand("ar", "analytic rank by zero counting");
  ar->add_option("file", file, "tensor file")->required()->check(CLI::ExistingFile);
  ar->add_option("--mode", modes, "mode k (repeatable, default all)");
  ar->add_flag("--char-check", char_check, "also run the character-sum route");

  auto* gr = app.add_subcommand("gr", "geometric rank estimate over extension towers");
  gr->add_option("file", file, "tensor file")->required()->check(CLI::ExistingFile);
  gr->add_option("--mode", mode, "mode k (default last)");
  gr->add_option("--lmax", l_max, "largest extension degree");

  auto* rank = app.add_subcommand("rank", "exact slice, partition or cp rank, and subrank");
  rank->add_option("file", file, "tensor file")->required()->check(CLI::ExistingFile);
  rank->add_option("--kind", kind, "rank kind")->check(CLI::IsMember({"slice", "partition", "cp"}));
  rank->add_option("--subrank", subrank, "test Id_s <= T");
  rank->add_flag("--generic-engine", generic, "partition rank with the generic membership engine");

  auto* stab = app.add_subcommand("stability", "analytic rank under base change");
  stab->add_option("file", file, "tensor file")->required()->check(CLI::ExistingFile);
  stab->add_option("--l", l, "extension degree");

  auto* mm = app.add_subcommand("matmul-table", "analytic rank of <n,n,n> over GF(2^l)");
  mm->add_option("--n", n, "matrix size");
  mm->add_option("--lmax", l_max, "largest extension degree");

  auto* audit = app.add_subcommand("audit", "seeded check of rank inequalities");
  audit->add_option("--shape", shape, "mode dimensions")->delimiter(',');
  audit->add_option("--q", q, "field size");
  audit->add_option("--count", count, "number of samples");
  audit->add_option("--seed", seed, "seed for mt19937_64");

  auto* sub = app.add_subcommand("subspace", "slice rank of a tensor subspace");
  sub->add_option("file", file, "basis file")->required()->check(CLI::ExistingFile);
  sub->add_option("--k", k, "also compute SR_k");
  sub->add_flag("--tw", tw, "also compute SR(T_W)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  std::string echo;
  for (int i = 0; i < argc; ++i) echo += (i ? " " : "") + std::string(argv[i]);
  const auto start = std::chrono::steady_clock::now();
  json report = {{"command", echo}};
  auto* active = app.get_subcommands().front();
  int code = kOk;
  try {
    std::string digest_src;
    if (active == mm)
      digest_src = json{{"n", n}, {"lmax", l_max}}.dump();
    else if (active == audit)
      digest_src = json{{"shape", shape}, {"q", q}, {"count", count}, {"seed", seed}}.dump();
    else
      digest_src = read_file(file);
    report["input_digest"] = {{"algorithm", "sha256"}, {"value", sha256_hex(digest_src)}};

    Outcome o;
    if (active == ar)
      o = cmd_ar(common, file, modes, char_check);
    else if (active == gr)
      o = cmd_gr(common, file, mode, l_max);
    else if (active == rank)
      o = cmd_rank(file, kind, subrank, generic);
    else if (active == stab)
      o = cmd_stability(common, file, l);
    else if (active == mm)
      o = cmd_matmul_table(common, n, l_max);
    else if (active == audit)
      o = cmd_audit(common, shape, q, count, seed);
    else
      o = cmd_subspace(file, k, tw);
    report["status"] = o.status;
    report["rng"] = o.rng;
    report["results"] = o.results;
    code = o.code;
  } catch (const violation& e) {
    report["status"] = "violation";
    report["error"] = e.what();
    report["rng"] = {{"generator", "mt19937_64"}, {"seed", seed}};
    report["results"] = e.dump();
    code = kViolation;
  } catch (const guard_error& e) {
    report["status"] = "guard_exceeded";
    report["error"] = e.what();
    code = kGuard;
  } catch (const verification_error& e) {
    report["status"] = "verification_failed";
    report["error"] = e.what();
    code = kVerify;
  } catch (const inconclusive_error& e) {
    report["status"] = "inconclusive";
    report["error"] = e.what();
    code = kInconclusive;
  } catch (const error& e) {
    // parse and argument errors
    report["status"] = "error";
    report["error"] = e.what();
    code = kUsage;
  }
  report["workers"] = workers(common);
  report["elapsed_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (report.contains("error")) std::cerr << "tenrank: " << report["error"].get<std::string>() << "\n";
  emit(report, common.format);
  return code;
}
