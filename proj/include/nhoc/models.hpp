#pragma once

#include <map>
#include <string>
#include <string_view>

#include "nhoc/constrained_system.hpp"
#include "nhoc/model.hpp"
#include "nhoc/splitting.hpp"

namespace nhoc {

struct ModelBundle {
  std::string name;
  AlgebroidModel model;
  ConstraintSpec constraint;

  ConstrainedSystem system() const { return ConstrainedSystem(model, constraint); }
};

/// Rigid body on so(3) ([e1,e2]=e3 and cyclic) with inertia
/// [[I11,0,I13],[0,I22,I23],[I13,I23,I33]] and the constraint xi^3 = 0.
ModelBundle make_suslov(double i11, double i22, double i33, double i13, double i23);

/// Chaplygin sleigh on se(2) in the basis (E1, E2, E3) with
/// [E3,E1] = -E2, [E2,E3] = E1, [E1,E2] = 0, kinetic energy
/// 1/2[(J+m(a^2+b^2)) w^2 + m v1^2 + m v2^2 - 2bm w v1 - 2am w v2] and the
/// constraint v2 = 0. The adapted basis of D is (E3, E1).
ModelBundle make_chaplygin(double m, double j, double a, double b);

/// Q = R^n, E = TQ with identity anchor and metric, V = 0, D = E.
ModelBundle make_double_integrator(int n);

/// E = TQ on an n-dimensional chart: identity anchor, coordinate frame (zero
/// structure functions), the given metric and potential, D = E unless a
/// constraint is supplied.
ModelBundle make_tangent_bundle(std::string name, int n, AlgebroidModel::MatrixFn metric,
                                AlgebroidModel::ScalarFn potential, ModelPartials partials = {},
                                std::optional<ConstraintSpec> constraint = std::nullopt);

using ParamMap = std::map<std::string, double>;

/// Dispatches "suslov", "chaplygin", "double_integrator" with defaults for
/// missing parameters; unknown parameter names are a ValidationError.
ModelBundle make_builtin(std::string_view name, const ParamMap& params);

/// Builds a model from a JSON config document (see README for the schema).
ModelBundle load_model_config(std::string_view document);
ModelBundle load_model_file(const std::string& path);

}  // namespace nhoc
