#include "nhoc/hamiltonian.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "nhoc/dynamics.hpp"
#include "nhoc/error.hpp"
#include "nhoc/numdiff.hpp"

namespace nhoc {

namespace {

void check_phase(const OCProblem& p, const PhasePoint& z) {
  if (z.q.size() != p.dim_q() || z.p_q.size() != p.dim_q() || z.y.size() != p.rank_d() ||
      z.p_y.size() != p.rank_d())
    fail(ErrorKind::DimensionMismatch, "phase point lengths do not match the problem");
}

void require_full(const OCProblem& p) {
  if (!p.controls.fully_actuated())
    fail(ErrorKind::InvalidArgument, "the Hamiltonian formulation needs a fully actuated problem");
}

constexpr double kLegendreNoiseFloor = 1e-8;

/// Controls u with dC/du(q, y, u) = Y^T p_y.
Vec controls_from_momentum(const OCProblem& p, const PhasePoint& z) {
  const Vec target = p.controls.input_matrix().transpose() * z.p_y;
  if (p.cost.is_quadratic()) {
    Eigen::FullPivLU<Mat> lu(p.cost.weight());
    lu.setThreshold(1e-10);
    if (lu.rank() < p.cost.weight().rows())
      fail(ErrorKind::SingularHessian, "cost weight matrix is singular");
    return lu.solve(target);
  }
  Vec u = target;
  auto residual = [&](const Vec& uu) { return Vec(p.cost.partials(z.q, z.y, uu).du - target); };
  Vec r = residual(u);
  for (int it = 0; it < 50; ++it) {
    if (r.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, target.cwiseAbs().maxCoeff())) return u;
    const Mat hess = p.cost.partials(z.q, z.y, u).duu;
    Eigen::FullPivLU<Mat> lu(hess);
    lu.setThreshold(1e-10);
    if (lu.rank() < hess.rows()) fail(ErrorKind::SingularHessian, "cost Hessian is singular");
    const Vec step = lu.solve(r);
    double alpha = 1.0;
    Vec trial = u - step;
    Vec r_trial = residual(trial);
    for (int halving = 0; halving < 20 && !(r_trial.norm() < r.norm()); ++halving) {
      alpha *= 0.5;
      trial = u - alpha * step;
      r_trial = residual(trial);
    }
    // finite-difference partials stall at their own noise level
    if (!(r_trial.norm() < r.norm()) &&
        r.cwiseAbs().maxCoeff() <= kLegendreNoiseFloor * std::max(1.0, target.cwiseAbs().maxCoeff()))
      return u;
    u = trial;
    r = r_trial;
  }
  if (r.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, target.cwiseAbs().maxCoeff())) return u;
  fail(ErrorKind::NewtonDivergence,
       "inverse Legendre map did not converge (residual " + std::to_string(r.norm()) + ")");
}

using Map = std::function<Vec(const Vec&)>;

Vec fixed_point(const Map& f, Vec x) {
  for (int it = 0; it < kFixedPointMaxIterations; ++it) {
    Vec next = f(x);
    if (!next.allFinite()) break;
    const double change = (next - x).cwiseAbs().maxCoeff();
    x = std::move(next);
    if (change <= kFixedPointTolerance * std::max(1.0, x.cwiseAbs().maxCoeff())) return x;
  }
  fail(ErrorKind::FixedPointDivergence, "implicit stage did not converge in " +
                                            std::to_string(kFixedPointMaxIterations) + " iterations");
}

}  // namespace

Vec pack(const PhasePoint& z) {
  Vec x(z.q.size() + z.y.size() + z.p_q.size() + z.p_y.size());
  x << z.q, z.y, z.p_q, z.p_y;
  return x;
}

PhasePoint unpack_phase(const Vec& x, int dim_q, int rank_d) {
  if (x.size() != 2 * (dim_q + rank_d))
    fail(ErrorKind::DimensionMismatch, "packed phase point has length " + std::to_string(x.size()));
  return {x.segment(0, dim_q), x.segment(dim_q, rank_d), x.segment(dim_q + rank_d, dim_q),
          x.segment(2 * dim_q + rank_d, rank_d)};
}

RegularityReport regularity_matrix(const OCProblem& problem, const ExtremalState& state) {
  const Eigen::Index n = problem.dim_q();
  Mat hessian;
  if (problem.controls.fully_actuated()) {
    hessian = lagrangian_partials(problem, state.q, state.y, state.v).hessian;
  } else {
    const Vec u = recover_controls(problem, state.q, state.y, state.v);
    hessian = problem.cost.partials(state.q, state.y, u).duu;
  }
  const Eigen::Index h = hessian.rows();
  RegularityReport rep;
  rep.matrix_m = Mat::Zero(h + 2 * n, h + 2 * n);
  rep.matrix_m.topLeftCorner(h, h) = hessian;
  rep.matrix_m.block(h, h + n, n, n) = Mat::Identity(n, n);
  rep.matrix_m.block(h + n, h, n, n) = Mat::Identity(n, n);
  const Eigen::Index size = rep.matrix_m.rows();
  rep.determinant = rep.matrix_m.fullPivLu().determinant();
  Eigen::JacobiSVD<Mat> svd(rep.matrix_m);
  const Vec& s = svd.singularValues();
  rep.condition = s[s.size() - 1] > 0.0 ? s[0] / s[s.size() - 1]
                                         : std::numeric_limits<double>::infinity();
  const double scale =
      std::pow(std::max(1.0, rep.matrix_m.cwiseAbs().maxCoeff()), static_cast<double>(size));
  rep.is_regular = std::isfinite(rep.determinant) && std::abs(rep.determinant) > 1e-10 * scale;
  return rep;
}

PhasePoint legendre_map(const OCProblem& problem, const ExtremalState& state) {
  require_full(problem);
  const RegularityReport rep = regularity_matrix(problem, state);
  if (!rep.is_regular) fail(ErrorKind::SingularHessian, "Legendre map is not regular at this state");
  const LagrangianPartials lp = lagrangian_partials(problem, state.q, state.y, state.v);
  return {state.q, state.y, state.lambda, lp.d_ydot};
}

ExtremalState inverse_legendre(const OCProblem& problem, const PhasePoint& phase) {
  require_full(problem);
  check_phase(problem, phase);
  const Vec u = controls_from_momentum(problem, phase);
  const Vec bias = problem.system.geometry(phase.q).bias(phase.y);
  return {phase.q, phase.y, problem.controls.input_matrix() * u - bias, phase.p_q, Vec(0)};
}

HamiltonianSystem::HamiltonianSystem(OCProblem problem) : problem_(std::move(problem)) {
  require_full(problem_);
  if (problem_.cost.is_quadratic()) {
    const Mat& w = problem_.cost.weight();
    Eigen::FullPivLU<Mat> lu(w);
    lu.setThreshold(1e-10);
    if (lu.rank() < w.rows()) fail(ErrorKind::SingularHessian, "cost weight matrix is singular");
    const Mat& y = problem_.controls.input_matrix();
    s_ = y * lu.solve(y.transpose());
    s_ = 0.5 * (s_ + s_.transpose());
  }
}

double HamiltonianSystem::closed_form_value(const PhasePoint& z) const {
  const Geometry geo = problem_.system.geometry(z.q);
  return 0.5 * z.p_y.dot(s_ * z.p_y) - z.p_y.dot(geo.bias(z.y)) +
         z.p_q.dot(geo.anchor_d.transpose() * z.y);
}

Vec HamiltonianSystem::closed_form_gradient(const PhasePoint& z) const {
  const Geometry geo = problem_.system.geometry(z.q);
  const std::vector<Mat> d_anchor = problem_.system.anchor_d_partials(z.q);
  const Mat bias_q = problem_.system.bias_jacobian_q(z.q, z.y);
  Vec dq = -bias_q.transpose() * z.p_y;
  for (std::size_t i = 0; i < d_anchor.size(); ++i)
    dq[static_cast<Eigen::Index>(i)] += z.y.dot(d_anchor[i] * z.p_q);
  const Vec dy = -geo.bias_jacobian_y(z.y).transpose() * z.p_y + geo.anchor_d * z.p_q;
  const Vec dpq = geo.anchor_d.transpose() * z.y;
  const Vec dpy = s_ * z.p_y - geo.bias(z.y);
  return pack(PhasePoint{dq, dy, dpq, dpy});
}

double HamiltonianSystem::value(const PhasePoint& z) const {
  check_phase(problem_, z);
  if (closed_form()) return closed_form_value(z);
  const ExtremalState e = inverse_legendre(problem_, z);
  const Geometry geo = problem_.system.geometry(z.q);
  const Vec u = recover_controls(problem_, z.q, z.y, e.v);
  return z.p_y.dot(e.v) + z.p_q.dot(geo.anchor_d.transpose() * z.y) - problem_.cost(z.q, z.y, u);
}

Vec HamiltonianSystem::gradient(const PhasePoint& z) const {
  check_phase(problem_, z);
  if (closed_form()) return closed_form_gradient(z);
  return gradient_fd(z);
}

Vec HamiltonianSystem::gradient_fd(const PhasePoint& z) const {
  check_phase(problem_, z);
  const int nq = dim_q(), r = rank_d();
  return numdiff::gradient([&](const Vec& x) { return value(unpack_phase(x, nq, r)); }, pack(z));
}

double hamiltonian_eval(const HamiltonianSystem& hs, const PhasePoint& z) { return hs.value(z); }

PhasePoint hamiltonian_field(const HamiltonianSystem& hs, const PhasePoint& z) {
  const Vec g = hs.gradient(z);
  const PhasePoint d = unpack_phase(g, hs.dim_q(), hs.rank_d());
  return {d.p_q, d.p_y, -d.q, -d.y};
}

PhasePoint integrate_step(const HamiltonianSystem& hs, const PhasePoint& z, double dt,
                          Integrator scheme) {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "dt must be positive");
  const int nq = hs.dim_q(), r = hs.rank_d();
  const Eigen::Index m = nq + r;  // positions (q, y), momenta (p_q, p_y)
  const Vec z0 = pack(z);
  const Vec x0 = z0.head(m), p0 = z0.tail(m);
  auto grad = [&](const Vec& x, const Vec& p) {
    Vec zz(2 * m);
    zz << x, p;
    return hs.gradient(unpack_phase(zz, nq, r));
  };
  auto join = [&](const Vec& x, const Vec& p) {
    Vec zz(2 * m);
    zz << x, p;
    if (!zz.allFinite()) fail(ErrorKind::NonFiniteState, "phase left the finite range within one step");
    return unpack_phase(zz, nq, r);
  };

  switch (scheme) {
    case Integrator::rk4: {
      auto f = [&](const Vec& x) { return pack(hamiltonian_field(hs, unpack_phase(x, nq, r))); };
      const Vec k1 = f(z0);
      const Vec k2 = f(z0 + 0.5 * dt * k1);
      const Vec k3 = f(z0 + 0.5 * dt * k2);
      const Vec k4 = f(z0 + dt * k3);
      const Vec z1 = z0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      return join(z1.head(m), z1.tail(m));
    }
    case Integrator::symplectic_euler: {
      const Vec p1 = fixed_point([&](const Vec& p) { return Vec(p0 - dt * grad(x0, p).head(m)); }, p0);
      const Vec x1 = x0 + dt * grad(x0, p1).tail(m);
      return join(x1, p1);
    }
    case Integrator::stormer_verlet: {
      const Vec p_half =
          fixed_point([&](const Vec& p) { return Vec(p0 - 0.5 * dt * grad(x0, p).head(m)); }, p0);
      const Vec v0 = grad(x0, p_half).tail(m);
      const Vec x1 = fixed_point(
          [&](const Vec& x) { return Vec(x0 + 0.5 * dt * (v0 + grad(x, p_half).tail(m))); }, x0 + dt * v0);
      const Vec p1 = p_half - 0.5 * dt * grad(x1, p_half).head(m);
      return join(x1, p1);
    }
  }
  fail(ErrorKind::InvalidArgument, "unknown integrator");
}

double symplecticity_defect(const HamiltonianSystem& hs, const PhasePoint& z, double dt,
                            Integrator scheme) {
  const int nq = hs.dim_q(), r = hs.rank_d();
  const Eigen::Index m = nq + r;
  const Mat jac = numdiff::jacobian(
      [&](const Vec& x) { return pack(integrate_step(hs, unpack_phase(x, nq, r), dt, scheme)); },
      pack(z), 2 * m, numdiff::kFirstStep);
  Mat j = Mat::Zero(2 * m, 2 * m);
  j.topRightCorner(m, m) = Mat::Identity(m, m);
  j.bottomLeftCorner(m, m) = -Mat::Identity(m, m);
  return (jac.transpose() * j * jac - j).cwiseAbs().maxCoeff();
}

Trajectory integrate_hamiltonian(const HamiltonianSystem& hs, const PhasePoint& z0, double t_final,
                                 double dt, Integrator scheme) {
  const OCProblem& p = hs.problem();
  const std::vector<double> grid = time_grid(t_final, dt);
  Trajectory traj;
  traj.times = grid;
  PhasePoint z = z0;
  guard_finite(pack(z), 0.0);
  auto record = [&](const PhasePoint& s) {
    traj.q.push_back(s.q);
    traj.y.push_back(s.y);
    traj.p_q.push_back(s.p_q);
    traj.p_y.push_back(s.p_y);
    const ExtremalState e = inverse_legendre(p, s);
    traj.controls.push_back(recover_controls(p, s.q, s.y, e.v));
    traj.energy.push_back(energy(p.system, StateQY{s.q, s.y}));
    traj.hamiltonian.push_back(hs.value(s));
  };
  record(z);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    z = integrate_step(hs, z, grid[k + 1] - grid[k], scheme);
    guard_finite(pack(z), grid[k + 1]);
    record(z);
  }
  return traj;
}

double trajectory_cost(const OCProblem& problem, const Trajectory& traj) {
  if (traj.controls.size() != traj.size())
    fail(ErrorKind::DimensionMismatch, "trajectory has no control samples");
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double c0 = problem.cost(traj.q[k], traj.y[k], traj.controls[k]);
    const double c1 = problem.cost(traj.q[k + 1], traj.y[k + 1], traj.controls[k + 1]);
    total += 0.5 * (traj.times[k + 1] - traj.times[k]) * (c0 + c1);
  }
  return total;
}

}  // namespace nhoc
