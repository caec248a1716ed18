#include "nhoc/optimal_control.hpp"

#include <string>
#include <utility>

#include "nhoc/error.hpp"
#include "nhoc/numdiff.hpp"

namespace nhoc {

namespace {

Vec select(const Vec& v, const std::vector<int>& idx) {
  Vec out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[idx[i]];
  return out;
}

Mat select_rows(const Mat& m, const std::vector<int>& idx) {
  Mat out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
  return out;
}

void require_length(const Vec& v, Eigen::Index n, const char* what) {
  if (v.size() != n)
    fail(ErrorKind::DimensionMismatch, std::string(what) + " has length " + std::to_string(v.size()) +
                                           ", expected " + std::to_string(n));
}

/// Solves m x = b, reporting a singular cost Hessian.
Vec solve_hessian(const Mat& m, const Vec& b) {
  Eigen::FullPivLU<Mat> lu(m);
  lu.setThreshold(1e-10);
  if (!m.allFinite() || lu.rank() < m.rows())
    fail(ErrorKind::SingularHessian, "cost Hessian with respect to the controls is singular");
  return lu.solve(b);
}

Mat input_inverse(const ControlDistribution& controls) {
  if (!controls.fully_actuated())
    fail(ErrorKind::InvalidArgument, "operation requires a fully actuated problem");
  return controls.input_matrix().fullPivLu().inverse();
}

void require_underactuation_support(const ControlDistribution& controls) {
  if (!controls.basis_aligned())
    fail(ErrorKind::InvalidArgument, "underactuated inputs must be aligned with the adapted basis");
}

/// Shared quantities of the lifted Lagrangian at one point.
struct Lift {
  Geometry geo;
  Vec bias;
  Mat bias_y;
  Mat bias_q;
  Vec u;
  CostModel::Partials cost;
};

Lift lift_full(const OCProblem& p, const Vec& q, const Vec& y, const Vec& y_dot, const Mat& y_inv) {
  Lift l;
  l.geo = p.system.geometry(q);
  l.bias = l.geo.bias(y);
  l.bias_y = l.geo.bias_jacobian_y(y);
  l.bias_q = p.system.bias_jacobian_q(q, y);
  l.u = y_inv * (y_dot + l.bias);
  l.cost = p.cost.partials(q, y, l.u);
  return l;
}

/// sum_i e_i (y^T dRho_i lambda): derivative of lambda . (rho_D^T y) with respect to q.
Vec anchor_term(const std::vector<Mat>& d_anchor, const Vec& y, const Vec& lambda) {
  Vec out(static_cast<Eigen::Index>(d_anchor.size()));
  for (std::size_t i = 0; i < d_anchor.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = y.dot(d_anchor[i] * lambda);
  return out;
}

}  // namespace

CostModel::CostModel(Fn value, PartialsFn partials, std::optional<Mat> weight)
    : value_(std::move(value)), partials_(std::move(partials)), weight_(std::move(weight)) {}

CostModel CostModel::quadratic(Mat weight) {
  if (weight.rows() != weight.cols() || weight.rows() < 1 || !weight.allFinite())
    fail(ErrorKind::ValidationError, "cost weight must be a finite square matrix");
  if ((weight - weight.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    fail(ErrorKind::ValidationError, "cost weight must be symmetric");
  Fn value = [w = weight](const Vec&, const Vec&, const Vec& u) {
    if (u.size() != w.rows()) fail(ErrorKind::DimensionMismatch, "control length does not match weight");
    return 0.5 * u.dot(w * u);
  };
  PartialsFn partials = [w = weight](const Vec& q, const Vec& y, const Vec& u) {
    return Partials{w * u,
                    Vec::Zero(y.size()),
                    Vec::Zero(q.size()),
                    w,
                    Mat::Zero(u.size(), y.size()),
                    Mat::Zero(u.size(), q.size())};
  };
  return CostModel(std::move(value), std::move(partials), std::move(weight));
}

CostModel CostModel::general(Fn value, PartialsFn partials) {
  if (!value) fail(ErrorKind::InvalidArgument, "cost function must be set");
  return CostModel(std::move(value), std::move(partials), std::nullopt);
}

CostModel::Partials CostModel::partials(const Vec& q, const Vec& y, const Vec& u) const {
  if (partials_) return partials_(q, y, u);
  const Eigen::Index nu = u.size(), ny = y.size(), nq = q.size();
  // z = (u, y, q)
  Vec z(nu + ny + nq);
  z << u, y, q;
  auto f = [&](const Vec& zz) {
    return value_(zz.segment(nu + ny, nq), zz.segment(nu, ny), zz.head(nu));
  };
  const Vec grad = numdiff::gradient(f, z);
  const double h = numdiff::kSecondStep;
  const double f0 = f(z);
  Mat second(nu, z.size());
  Vec zz = z;
  for (Eigen::Index i = 0; i < nu; ++i) {
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      if (i == j) {
        zz[i] = z[i] + h;
        const double fp = f(zz);
        zz[i] = z[i] - h;
        const double fm = f(zz);
        zz[i] = z[i];
        second(i, j) = (fp - 2.0 * f0 + fm) / (h * h);
        continue;
      }
      double acc = 0.0;
      for (int si : {1, -1})
        for (int sj : {1, -1}) {
          zz[i] = z[i] + si * h;
          zz[j] = z[j] + sj * h;
          acc += si * sj * f(zz);
        }
      zz[i] = z[i];
      zz[j] = z[j];
      second(i, j) = acc / (4.0 * h * h);
    }
  }
  Partials out;
  out.du = grad.head(nu);
  out.dy = grad.segment(nu, ny);
  out.dq = grad.tail(nq);
  out.duu = 0.5 * (second.leftCols(nu) + second.leftCols(nu).transpose());
  out.duy = second.middleCols(nu, ny);
  out.duq = second.rightCols(nq);
  return out;
}

OCProblem::OCProblem(ConstrainedSystem system_in, ControlDistribution controls_in, CostModel cost_in,
                     double horizon_in, Boundary boundary_in)
    : system(std::move(system_in)),
      controls(std::move(controls_in)),
      cost(std::move(cost_in)),
      horizon(horizon_in),
      boundary(std::move(boundary_in)) {
  if (!(horizon > 0.0)) fail(ErrorKind::InvalidArgument, "horizon must be positive");
  if (controls.rank_d() != system.rank_d())
    fail(ErrorKind::DimensionMismatch, "control distribution rank differs from rank of D");
  if (cost.is_quadratic() && cost.weight().rows() != controls.inputs())
    fail(ErrorKind::DimensionMismatch, "cost weight size differs from the number of inputs");
  auto fill = [](Vec& v, int n, const char* what) {
    if (v.size() == 0) v = Vec::Zero(n);
    require_length(v, n, what);
  };
  fill(boundary.q0, dim_q(), "q0");
  fill(boundary.qT, dim_q(), "qT");
  fill(boundary.y0, rank_d(), "y0");
  fill(boundary.yT, rank_d(), "yT");
}

Vec pack(const ExtremalState& s) {
  Vec x(s.q.size() + s.y.size() + s.v.size() + s.lambda.size() + s.lambda_bar.size());
  x << s.q, s.y, s.v, s.lambda, s.lambda_bar;
  return x;
}

ExtremalState unpack_extremal(const Vec& x, const OCProblem& problem) {
  const Eigen::Index nq = problem.dim_q(), r = problem.rank_d(), k = problem.inputs();
  require_length(x, nq + r + k + nq + (r - k), "packed extremal state");
  ExtremalState s;
  Eigen::Index o = 0;
  s.q = x.segment(o, nq), o += nq;
  s.y = x.segment(o, r), o += r;
  s.v = x.segment(o, k), o += k;
  s.lambda = x.segment(o, nq), o += nq;
  s.lambda_bar = x.segment(o, r - k);
  return s;
}

Vec recover_controls(const OCProblem& problem, const Vec& q, const Vec& y, const Vec& y_dot) {
  require_length(y, problem.rank_d(), "y");
  const Vec bias = problem.system.geometry(q).bias(y);
  if (problem.controls.fully_actuated()) {
    require_length(y_dot, problem.rank_d(), "y_dot");
    return problem.controls.input_matrix().fullPivLu().solve(y_dot + bias);
  }
  require_underactuation_support(problem.controls);
  const auto& act = problem.controls.actuated_indices();
  if (y_dot.size() == problem.rank_d()) return select(y_dot + bias, act);
  require_length(y_dot, problem.inputs(), "y_dot");
  return y_dot + select(bias, act);
}

double lift_cost(const OCProblem& problem, const Vec& q, const Vec& y, const Vec& y_dot) {
  return problem.cost(q, y, recover_controls(problem, q, y, y_dot));
}

Vec phi_residual(const OCProblem& problem, const Vec& q, const Vec& y, const Vec& y_dot) {
  require_length(y_dot, problem.rank_d(), "y_dot");
  const auto& un = problem.controls.unactuated_indices();
  return select(y_dot + problem.system.geometry(q).bias(y), un);
}

LagrangianPartials lagrangian_partials(const OCProblem& problem, const Vec& q, const Vec& y,
                                       const Vec& y_dot) {
  require_length(y, problem.rank_d(), "y");
  require_length(y_dot, problem.rank_d(), "y_dot");
  const Mat y_inv = input_inverse(problem.controls);
  const Lift l = lift_full(problem, q, y, y_dot, y_inv);
  LagrangianPartials out;
  out.value = problem.cost(q, y, l.u);
  out.d_ydot = y_inv.transpose() * l.cost.du;
  out.d_y = l.cost.dy + l.bias_y.transpose() * out.d_ydot;
  out.d_q = l.cost.dq + l.bias_q.transpose() * out.d_ydot;
  out.hessian = y_inv.transpose() * l.cost.duu * y_inv;
  return out;
}

ExtremalState necessary_conditions_field(const OCProblem& problem, const ExtremalState& s) {
  const Eigen::Index nq = problem.dim_q(), r = problem.rank_d();
  require_length(s.q, nq, "q");
  require_length(s.y, r, "y");
  require_length(s.v, r, "v");
  require_length(s.lambda, nq, "lambda");
  const Mat y_inv = input_inverse(problem.controls);
  const Lift l = lift_full(problem, s.q, s.y, s.v, y_inv);

  const Vec momentum = y_inv.transpose() * l.cost.du;
  const Vec dl_dy = l.cost.dy + l.bias_y.transpose() * momentum;
  const Vec dl_dq = l.cost.dq + l.bias_q.transpose() * momentum;
  const Mat hessian = y_inv.transpose() * l.cost.duu * y_inv;

  ExtremalState d;
  d.q = l.geo.anchor_d.transpose() * s.y;
  d.y = s.v;
  // d/dt dL/dy' = Y^-T [C_uu u' + C_uy y' + C_uq q'],  u' = Y^-1 (v' + bias_y v + bias_q q')
  const Vec rhs = dl_dy - l.geo.anchor_d * s.lambda -
                  y_inv.transpose() * (l.cost.duy * s.v + l.cost.duq * d.q);
  d.v = solve_hessian(hessian, rhs) - l.bias_y * s.v - l.bias_q * d.q;
  d.lambda = dl_dq - anchor_term(problem.system.anchor_d_partials(s.q), s.y, s.lambda);
  d.lambda_bar = Vec(0);
  return d;
}

ExtremalState underactuated_field(const OCProblem& problem, const ExtremalState& s) {
  require_underactuation_support(problem.controls);
  const Eigen::Index nq = problem.dim_q(), r = problem.rank_d(), k = problem.inputs();
  require_length(s.q, nq, "q");
  require_length(s.y, r, "y");
  require_length(s.v, k, "v");
  require_length(s.lambda, nq, "lambda");
  require_length(s.lambda_bar, r - k, "lambda_bar");
  const auto& act = problem.controls.actuated_indices();
  const auto& un = problem.controls.unactuated_indices();

  const Geometry geo = problem.system.geometry(s.q);
  const Vec bias = geo.bias(s.y);
  const Mat bias_y = geo.bias_jacobian_y(s.y);
  const Mat bias_q = problem.system.bias_jacobian_q(s.q, s.y);

  Vec y_dot(r);
  for (std::size_t a = 0; a < act.size(); ++a) y_dot[act[a]] = s.v[static_cast<Eigen::Index>(a)];
  for (int alpha : un) y_dot[alpha] = -bias[alpha];
  const Vec q_dot = geo.anchor_d.transpose() * s.y;

  const Vec u = s.v + select(bias, act);
  const CostModel::Partials c = problem.cost.partials(s.q, s.y, u);
  const Mat bias_y_act = select_rows(bias_y, act);
  const Mat bias_q_act = select_rows(bias_q, act);
  const Mat phi_y = select_rows(bias_y, un);
  const Mat phi_q = select_rows(bias_q, un);

  const Vec dl_dy = c.dy + bias_y_act.transpose() * c.du;
  const Vec dl_dq = c.dq + bias_q_act.transpose() * c.du;
  const Vec rho_lambda = geo.anchor_d * s.lambda;
  const Vec constraint_force = phi_y.transpose() * s.lambda_bar;

  ExtremalState d;
  d.q = q_dot;
  d.y = y_dot;
  const Vec rhs = select(dl_dy - rho_lambda + constraint_force, act) - c.duy * y_dot - c.duq * q_dot;
  d.v = solve_hessian(c.duu, rhs) - bias_y_act * y_dot - bias_q_act * q_dot;
  d.lambda = dl_dq - anchor_term(problem.system.anchor_d_partials(s.q), s.y, s.lambda) +
             phi_q.transpose() * s.lambda_bar;
  // The lifted cost does not depend on y'^alpha, so d/dt(dL/dy'^alpha) vanishes.
  d.lambda_bar = select(dl_dy - rho_lambda + constraint_force, un);
  return d;
}

}  // namespace nhoc
