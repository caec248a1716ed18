#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "nhoc/error.hpp"
#include "nhoc/models.hpp"

namespace nhoc {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& field, const std::string& msg) {
  fail(ErrorKind::ParseError, "field '" + field + "': " + msg);
}

int line_of(std::string_view doc, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < doc.size(); ++i)
    if (doc[i] == '\n') ++line;
  return line;
}

void reject_unknown_fields(const json& obj, const std::set<std::string>& allowed,
                           const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) parse_fail(where.empty() ? key : where + "." + key, "unknown field");
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) parse_fail(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) parse_fail(field, "not finite");
  return x;
}

int integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) parse_fail(field, "expected an integer");
  return v.get<int>();
}

Mat matrix(const json& v, const std::string& field, int cols) {
  if (!v.is_array()) parse_fail(field, "expected an array of rows");
  Mat m(static_cast<Eigen::Index>(v.size()), cols);
  for (std::size_t r = 0; r < v.size(); ++r) {
    const auto& row = v[r];
    const std::string rf = field + "[" + std::to_string(r) + "]";
    if (!row.is_array()) parse_fail(rf, "expected an array");
    if (static_cast<int>(row.size()) != cols)
      parse_fail(rf, "expected " + std::to_string(cols) + " entries, got " + std::to_string(row.size()));
    for (int c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), c) = number(row[static_cast<std::size_t>(c)], rf + "[" + std::to_string(c) + "]");
  }
  return m;
}

Tensor3 structure_constants(const json& v, int n) {
  const std::string field = "structure_constants";
  if (!v.is_array()) parse_fail(field, "expected an array of [C, A, B, value]");
  Tensor3 c(n);
  std::vector<char> seen(static_cast<std::size_t>(n * n * n), 0);
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string ef = field + "[" + std::to_string(k) + "]";
    const auto& e = v[k];
    if (!e.is_array() || e.size() != 4) parse_fail(ef, "expected [C, A, B, value]");
    int idx[3];
    for (int j = 0; j < 3; ++j) {
      idx[j] = integer(e[static_cast<std::size_t>(j)], ef);
      if (idx[j] < 0 || idx[j] >= n) parse_fail(ef, "index out of range for rank_e " + std::to_string(n));
    }
    const double value = number(e[3], ef);
    const std::size_t flat = static_cast<std::size_t>((idx[0] * n + idx[1]) * n + idx[2]);
    if (seen[flat]) parse_fail(ef, "duplicate entry");
    seen[flat] = 1;
    c(idx[0], idx[1], idx[2]) = value;
  }
  for (int cc = 0; cc < n; ++cc)
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        const double ab = c(cc, a, b);
        const double ba = c(cc, b, a);
        const bool given_ab = seen[static_cast<std::size_t>((cc * n + a) * n + b)];
        const bool given_ba = seen[static_cast<std::size_t>((cc * n + b) * n + a)];
        if (a == b) {
          if (ab != 0.0)
            fail(ErrorKind::ValidationError, "structure constant C^" + std::to_string(cc) + "_" +
                                                 std::to_string(a) + std::to_string(a) + " must vanish");
        } else if (given_ab && given_ba) {
          if (std::abs(ab + ba) > 1e-14 * std::max(1.0, std::abs(ab)))
            fail(ErrorKind::ValidationError,
                 "structure constants not antisymmetric at C^" + std::to_string(cc) + "_" +
                     std::to_string(a) + std::to_string(b));
        } else if (given_ab) {
          c(cc, b, a) = -ab;
        } else if (given_ba) {
          c(cc, a, b) = -ba;
        }
      }
  return c;
}

ConstraintSpec constraint(const json& v, int n) {
  if (!v.is_object()) parse_fail("constraint", "expected an object");
  reject_unknown_fields(v, {"annihilator", "span"}, "constraint");
  if (v.size() != 1) parse_fail("constraint", "give exactly one of 'annihilator' or 'span'");
  if (v.contains("annihilator")) {
    Mat mu = matrix(v["annihilator"], "constraint.annihilator", n);
    return ConstraintSpec::from_annihilator(std::move(mu));
  }
  // span is given as a list of vectors; store them as columns
  Mat rows = matrix(v["span"], "constraint.span", n);
  return ConstraintSpec::from_span(rows.transpose());
}

ModelBundle builtin(const json& doc) {
  reject_unknown_fields(doc, {"name", "kind", "params"}, "");
  ParamMap params;
  if (doc.contains("params")) {
    const auto& p = doc["params"];
    if (!p.is_object()) parse_fail("params", "expected an object");
    for (const auto& [key, value] : p.items()) params[key] = number(value, "params." + key);
  }
  return make_builtin(doc["name"].get<std::string>(), params);
}

ModelBundle constant_lie_algebra(const json& doc) {
  reject_unknown_fields(doc, {"name", "kind", "rank_e", "structure_constants", "metric", "constraint"}, "");
  for (const char* key : {"rank_e", "structure_constants", "metric", "constraint"})
    if (!doc.contains(key)) parse_fail(key, "missing");
  const int n = integer(doc["rank_e"], "rank_e");
  if (n < 1) parse_fail("rank_e", "must be >= 1");
  Tensor3 c = structure_constants(doc["structure_constants"], n);
  Mat g = matrix(doc["metric"], "metric", n);
  if (g.rows() != n) parse_fail("metric", "expected " + std::to_string(n) + " rows");
  if (!is_symmetric_positive_definite(g))
    fail(ErrorKind::ValidationError, "metric is not symmetric positive-definite");
  ConstraintSpec spec = constraint(doc["constraint"], n);
  try {
    validate_constraint(spec, n);
  } catch (const Error& e) {
    fail(ErrorKind::ValidationError, std::string("constraint: ") + e.what());
  }
  return {doc["name"].get<std::string>(), AlgebroidModel::lie_algebra(std::move(c), std::move(g)),
          std::move(spec)};
}

}  // namespace

ModelBundle load_model_config(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ParseError, "line " + std::to_string(line_of(document, e.byte)) + ": " + e.what());
  }
  if (!doc.is_object()) parse_fail("<root>", "expected an object");
  if (!doc.contains("name") || !doc["name"].is_string()) parse_fail("name", "missing or not a string");
  if (!doc.contains("kind") || !doc["kind"].is_string()) parse_fail("kind", "missing or not a string");
  const auto kind = doc["kind"].get<std::string>();
  if (kind == "builtin") return builtin(doc);
  if (kind == "lie_algebra_constant") return constant_lie_algebra(doc);
  parse_fail("kind", "unknown kind '" + kind + "'");
}

ModelBundle load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "no such file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return load_model_config(text.str());
}

}  // namespace nhoc
