#pragma once

// JSON ingestion and serialisation. Elements are base-p integer codes, fields are {p, k}
// (the modulus is canonical), tensors are row-major entry lists, subspaces are row lists.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tenrank/errors.hpp"
#include "tenrank/gf.hpp"
#include "tenrank/linalg.hpp"
#include "tenrank/search.hpp"
#include "tenrank/subspace.hpp"
#include "tenrank/tensor.hpp"

namespace tenrank {

using json = nlohmann::ordered_json;

/// Fixed 12-digit decimal rendering for approximate views.
inline std::string decimal12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12f", v);
  return buf;
}

namespace detail {

template <class T>
T get_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw parse_error(std::string("missing key \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw parse_error(std::string("bad value for \"") + key + "\": " + e.what());
  }
}

inline Field field_from_json(const json& j) {
  const auto p = get_field<std::uint64_t>(j, "p");
  const auto k = get_field<unsigned>(j, "k");
  try {
    return Field::make(p, k);
  } catch (const argument_error& e) {
    throw parse_error(e.what());
  }
}

inline std::vector<FieldElem> elems_from_json(const json& j, const Field& f, std::size_t expect, const char* what) {
  if (!j.is_array()) throw parse_error(std::string(what) + " must be an array");
  if (j.size() != expect)
    throw parse_error(std::string(what) + " has " + std::to_string(j.size()) + " entries, expected " + std::to_string(expect));
  std::vector<FieldElem> out;
  out.reserve(expect);
  for (const auto& v : j) {
    if (!v.is_number_unsigned()) throw parse_error(std::string(what) + " entries must be non-negative integers");
    const auto c = v.get<std::uint64_t>();
    if (c >= f.q()) throw parse_error(std::string(what) + " entry " + std::to_string(c) + " is not an element of " + f.name());
    out.push_back(FieldElem{static_cast<std::uint32_t>(c)});
  }
  return out;
}

inline json elems_to_json(std::span<const FieldElem> v) {
  json a = json::array();
  for (auto x : v) a.push_back(x.code);
  return a;
}

inline Shape shape_from_json(const json& j, std::size_t min_order) {
  const auto shape = get_field<Shape>(j, "shape");
  if (shape.size() < min_order) throw parse_error("tensor order must be at least " + std::to_string(min_order));
  // order-0 restriction targets (Id_0) are the only tensors with empty modes
  for (auto n : shape)
    if (n == 0 && min_order > 0) throw parse_error("mode dimensions must be positive");
  return shape;
}

}  // namespace detail

inline json field_to_json(const Field& f) { return {{"p", f.p()}, {"k", f.k()}}; }

inline json tensor_to_json(const Tensor& t) {
  json j = field_to_json(t.field());
  j["shape"] = t.shape();
  j["entries"] = detail::elems_to_json(t.entries());
  return j;
}

inline Tensor tensor_from_json(const json& j, std::size_t min_order = 2) {
  const Field f = detail::field_from_json(j);
  const Shape shape = detail::shape_from_json(j, min_order);
  if (!j.contains("entries")) throw parse_error("missing key \"entries\"");
  return Tensor(f, shape, detail::elems_from_json(j["entries"], f, shape_size(shape), "entries"));
}

inline json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", detail::elems_to_json(m.data())}};
}

inline Matrix matrix_from_json(const json& j, const Field& f) {
  const auto r = detail::get_field<std::size_t>(j, "rows"), c = detail::get_field<std::size_t>(j, "cols");
  if (!j.contains("entries")) throw parse_error("missing key \"entries\"");
  return Matrix(f, r, c, detail::elems_from_json(j["entries"], f, r * c, "matrix entries"));
}

/// Subspaces serialise as their reduced basis rows.
inline json subspace_to_json(const Subspace& s) {
  json rows = json::array();
  for (std::size_t i = 0; i < s.dim(); ++i) rows.push_back(detail::elems_to_json(s.basis().row(i)));
  return {{"ambient", s.ambient_dim()}, {"rows", rows}};
}

/// {"p", "k", "shape", "basis": [[entries], ...]}; the basis tensors must be independent.
inline TensorSubspace tensor_subspace_from_json(const json& j) {
  const Field f = detail::field_from_json(j);
  const Shape shape = detail::shape_from_json(j, 2);
  const auto& b = j.contains("basis") ? j["basis"] : throw parse_error("missing key \"basis\"");
  if (!b.is_array()) throw parse_error("basis must be an array of entry lists");
  std::vector<Tensor> basis;
  for (const auto& e : b) basis.emplace_back(f, shape, detail::elems_from_json(e, f, shape_size(shape), "basis entries"));
  try {
    return TensorSubspace(f, shape, std::move(basis));
  } catch (const argument_error& e) {
    throw parse_error(e.what());
  }
}

inline json tensor_subspace_to_json(const TensorSubspace& w) {
  json j = field_to_json(w.field());
  j["shape"] = w.shape();
  json b = json::array();
  for (const auto& t : w.basis()) b.push_back(detail::elems_to_json(t.entries()));
  j["basis"] = b;
  return j;
}

inline json modes_to_json(ModeMask m) {
  json a = json::array();
  for (std::size_t i = 0; i < 32; ++i)
    if (m >> i & 1) a.push_back(i);
  return a;
}

inline json decomp_to_json(const DecompCert& c) {
  json j = field_to_json(c.field);
  j["kind"] = kind_name(c.kind);
  j["shape"] = c.shape;
  json terms = json::array();
  for (const auto& t : c.terms) {
    json tj{{"modes", modes_to_json(t.modes)}, {"a", detail::elems_to_json(t.a.entries())}, {"b", detail::elems_to_json(t.b.entries())}};
    if (!t.factors.empty()) {
      json fs = json::array();
      for (const auto& v : t.factors) fs.push_back(detail::elems_to_json(v));
      tj["factors"] = fs;
    }
    terms.push_back(tj);
  }
  j["terms"] = terms;
  return j;
}

inline DecompCert decomp_from_json(const json& j) {
  DecompCert c;
  c.field = detail::field_from_json(j);
  c.shape = detail::shape_from_json(j, 2);
  const auto kind = detail::get_field<std::string>(j, "kind");
  if (kind == "slice")
    c.kind = DecompKind::slice;
  else if (kind == "partition")
    c.kind = DecompKind::partition;
  else if (kind == "cp")
    c.kind = DecompKind::cp;
  else
    throw parse_error("unknown decomposition kind " + kind);
  if (!j.contains("terms") || !j["terms"].is_array()) throw parse_error("missing term list");
  for (const auto& tj : j["terms"]) {
    DecompTerm t;
    for (auto m : detail::get_field<std::vector<std::size_t>>(tj, "modes")) {
      if (m >= c.shape.size()) throw parse_error("term mode out of range");
      t.modes |= ModeMask{1} << m;
    }
    const ModeMask all = (ModeMask{1} << c.shape.size()) - 1;
    if (t.modes == 0 || t.modes == all) throw parse_error("term modes must form a proper bipartition");
    const Shape sa = detail::sub_shape(c.shape, t.modes, true), sb = detail::sub_shape(c.shape, t.modes, false);
    t.a = Tensor(c.field, sa, detail::elems_from_json(tj.at("a"), c.field, shape_size(sa), "term a"));
    t.b = Tensor(c.field, sb, detail::elems_from_json(tj.at("b"), c.field, shape_size(sb), "term b"));
    if (tj.contains("factors"))
      for (std::size_t i = 0; i < tj["factors"].size(); ++i)
        t.factors.push_back(detail::elems_from_json(tj["factors"][i], c.field, c.shape.at(i), "factor"));
    c.terms.push_back(std::move(t));
  }
  return c;
}

inline json restriction_to_json(const RestrictionCert& c) {
  json mats = json::array();
  for (const auto& m : c.m.mats) mats.push_back(matrix_to_json(m));
  return {{"matrices", mats}, {"source", tensor_to_json(c.source)}, {"target", tensor_to_json(c.target)}};
}

inline RestrictionCert restriction_from_json(const json& j) {
  RestrictionCert c;
  if (!j.contains("source") || !j.contains("target") || !j.contains("matrices")) throw parse_error("incomplete restriction certificate");
  c.source = tensor_from_json(j["source"]);
  c.target = tensor_from_json(j["target"], 0);
  for (const auto& m : j["matrices"]) c.m.mats.push_back(matrix_from_json(m, c.source.field()));
  return c;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw parse_error(path + ": " + e.what());
  }
}

inline Tensor load_tensor(const std::string& path) { return tensor_from_json(read_json_file(path)); }
inline TensorSubspace load_tensor_subspace(const std::string& path) { return tensor_subspace_from_json(read_json_file(path)); }

}  // namespace tenrank
