#include "nhoc/models.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "nhoc/error.hpp"

namespace nhoc {

namespace {

void require_spd(const Mat& g, const char* what) {
  if (!is_symmetric_positive_definite(g))
    fail(ErrorKind::NotPositiveDefinite, std::string(what) + " is not positive-definite");
}

void set_bracket(Tensor3& c, int a, int b, int result, double sign) {
  c(result, a, b) = sign;
  c(result, b, a) = -sign;
}

double param(const ParamMap& params, const char* key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const ParamMap& params, std::initializer_list<const char*> known,
                    std::string_view model) {
  for (const auto& [key, value] : params) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok)
      fail(ErrorKind::ValidationError,
           "unknown parameter '" + key + "' for builtin model '" + std::string(model) + "'");
    if (!std::isfinite(value))
      fail(ErrorKind::ValidationError, "parameter '" + key + "' is not finite");
  }
}

}  // namespace

ModelBundle make_suslov(double i11, double i22, double i33, double i13, double i23) {
  Mat inertia(3, 3);
  inertia << i11, 0.0, i13, 0.0, i22, i23, i13, i23, i33;
  require_spd(inertia, "inertia matrix");
  Tensor3 c(3);
  set_bracket(c, 0, 1, 2, 1.0);
  set_bracket(c, 1, 2, 0, 1.0);
  set_bracket(c, 2, 0, 1, 1.0);
  Mat mu(1, 3);
  mu << 0.0, 0.0, 1.0;
  return {"suslov", AlgebroidModel::lie_algebra(std::move(c), std::move(inertia)),
          ConstraintSpec::from_annihilator(std::move(mu))};
}

ModelBundle make_chaplygin(double m, double j, double a, double b) {
  if (!(m > 0.0) || !(j > 0.0))
    fail(ErrorKind::NotPositiveDefinite, "Chaplygin sleigh needs m > 0 and J > 0");
  Mat g(3, 3);
  g << m, 0.0, -b * m, 0.0, m, -a * m, -b * m, -a * m, j + m * (a * a + b * b);
  require_spd(g, "sleigh kinetic energy");
  Tensor3 c(3);
  set_bracket(c, 2, 0, 1, -1.0);  // [E3, E1] = -E2
  set_bracket(c, 1, 2, 0, 1.0);   // [E2, E3] = E1
  Mat span(3, 2);
  span << 0.0, 1.0, 0.0, 0.0, 1.0, 0.0;  // columns E3, E1
  Mat mu(1, 3);
  mu << 0.0, 1.0, 0.0;
  return {"chaplygin", AlgebroidModel::lie_algebra(std::move(c), std::move(g)),
          ConstraintSpec::from_span_and_annihilator(std::move(span), std::move(mu))};
}

ModelBundle make_double_integrator(int n) {
  if (n < 1) fail(ErrorKind::ValidationError, "double integrator needs n >= 1");
  ModelPartials partials;
  partials.anchor = [n](const Vec&) { return std::vector<Mat>(static_cast<std::size_t>(n), Mat::Zero(n, n)); };
  partials.metric = partials.anchor;
  partials.potential = [n](const Vec&) { return Vec::Zero(n); };
  return make_tangent_bundle(
      "double_integrator", n, [n](const Vec&) { return Mat::Identity(n, n); },
      [](const Vec&) { return 0.0; }, std::move(partials));
}

ModelBundle make_tangent_bundle(std::string name, int n, AlgebroidModel::MatrixFn metric,
                                AlgebroidModel::ScalarFn potential, ModelPartials partials,
                                std::optional<ConstraintSpec> constraint) {
  if (n < 1) fail(ErrorKind::ValidationError, "tangent bundle needs a chart of dimension >= 1");
  if (!partials.anchor)
    partials.anchor = [n](const Vec&) { return std::vector<Mat>(static_cast<std::size_t>(n), Mat::Zero(n, n)); };
  AlgebroidModel model(
      n, n, [n](const Vec&) { return Tensor3(n); }, [n](const Vec&) { return Mat::Identity(n, n); },
      std::move(metric), std::move(potential), std::move(partials));
  return {std::move(name), std::move(model),
          constraint ? std::move(*constraint) : ConstraintSpec::full(n)};
}

ModelBundle make_builtin(std::string_view name, const ParamMap& params) {
  if (name == "suslov") {
    reject_unknown(params, {"I11", "I22", "I33", "I13", "I23"}, name);
    return make_suslov(param(params, "I11", 2.0), param(params, "I22", 3.0),
                       param(params, "I33", 4.0), param(params, "I13", 0.1),
                       param(params, "I23", 0.2));
  }
  if (name == "chaplygin") {
    reject_unknown(params, {"m", "J", "a", "b"}, name);
    return make_chaplygin(param(params, "m", 1.0), param(params, "J", 1.0), param(params, "a", 1.0),
                          param(params, "b", 0.0));
  }
  if (name == "double_integrator") {
    reject_unknown(params, {"n"}, name);
    const double n = param(params, "n", 1.0);
    if (n != std::floor(n)) fail(ErrorKind::ValidationError, "n must be an integer");
    return make_double_integrator(static_cast<int>(n));
  }
  fail(ErrorKind::ValidationError, "unknown builtin model '" + std::string(name) + "'");
}

}  // namespace nhoc
