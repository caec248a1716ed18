#pragma once

#include <functional>
#include <optional>

#include "nhoc/constrained_system.hpp"
#include "nhoc/controls.hpp"
#include "nhoc/types.hpp"

namespace nhoc {

/// Running cost C(q, y, u). Quadratic costs C = 1/2 u^T W u carry exact
/// partials; general costs are differentiated numerically (first partials
/// with step 1e-6, second partials with step 1e-4).
class CostModel {
 public:
  using Fn = std::function<double(const Vec& q, const Vec& y, const Vec& u)>;

  struct Partials {
    Vec du, dy, dq;
    Mat duu;  ///< k x k
    Mat duy;  ///< k x rank_d
    Mat duq;  ///< k x dim_q
  };
  using PartialsFn = std::function<Partials(const Vec& q, const Vec& y, const Vec& u)>;

  /// W must be symmetric; singular W is accepted here and reported as
  /// SingularHessian by the regularity check.
  static CostModel quadratic(Mat weight);
  static CostModel general(Fn value, PartialsFn partials = {});

  double operator()(const Vec& q, const Vec& y, const Vec& u) const { return value_(q, y, u); }
  Partials partials(const Vec& q, const Vec& y, const Vec& u) const;

  bool is_quadratic() const noexcept { return weight_.has_value(); }
  const Mat& weight() const { return *weight_; }

 private:
  CostModel(Fn value, PartialsFn partials, std::optional<Mat> weight);

  Fn value_;
  PartialsFn partials_;
  std::optional<Mat> weight_;
};

struct Boundary {
  Vec q0, y0, qT, yT;
};

/// Constrained system, inputs, cost, horizon and boundary data. An empty
/// boundary is replaced by zeros of the right lengths.
struct OCProblem {
  OCProblem(ConstrainedSystem system, ControlDistribution controls, CostModel cost,
            double horizon = 1.0, Boundary boundary = {});

  ConstrainedSystem system;
  ControlDistribution controls;
  CostModel cost;
  double horizon;
  Boundary boundary;

  int dim_q() const noexcept { return system.dim_q(); }
  int rank_d() const noexcept { return system.rank_d(); }
  int inputs() const noexcept { return controls.inputs(); }
};

/// Lagrange-multiplier coordinates of an extremal. `v` holds y' for the
/// actuated directions (all of them when fully actuated); `lambda_bar` is
/// empty unless the problem is underactuated.
struct ExtremalState {
  Vec q, y, v, lambda, lambda_bar;
};

Vec pack(const ExtremalState& s);
ExtremalState unpack_extremal(const Vec& x, const OCProblem& problem);

/// u such that y' + Gamma(y,y) + grad V = Y u. For underactuated problems the
/// actuated rows are returned and y_dot may have length rank_d or k.
Vec recover_controls(const OCProblem& problem, const Vec& q, const Vec& y, const Vec& y_dot);

/// The lifted Lagrangian C(q, y, u(q, y, y')).
double lift_cost(const OCProblem& problem, const Vec& q, const Vec& y, const Vec& y_dot);

/// Unactuated residuals Phi^alpha = y'^alpha + Gamma^alpha(y,y) + (grad V)^alpha.
Vec phi_residual(const OCProblem& problem, const Vec& q, const Vec& y, const Vec& y_dot);

/// Partial derivatives of the lifted Lagrangian at (q, y, y'), fully actuated.
struct LagrangianPartials {
  double value;
  Vec d_ydot;   ///< also the momentum p_y
  Vec d_y;
  Vec d_q;
  Mat hessian;  ///< d^2 L / d y' d y'
};

LagrangianPartials lagrangian_partials(const OCProblem& problem, const Vec& q, const Vec& y,
                                       const Vec& y_dot);

/// Explicit first-order form of the fully actuated necessary conditions.
/// Returns (q', y', v', lambda') packed as an ExtremalState.
ExtremalState necessary_conditions_field(const OCProblem& problem, const ExtremalState& state);

/// Necessary conditions with unactuated accelerations eliminated through
/// Phi^alpha = 0. Returns (q', y', v'^a, lambda', lambda_bar').
ExtremalState underactuated_field(const OCProblem& problem, const ExtremalState& state);

}  // namespace nhoc
