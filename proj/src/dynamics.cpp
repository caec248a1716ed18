#include "nhoc/dynamics.hpp"

#include <string>

#include "nhoc/error.hpp"

namespace nhoc {

namespace {

void check_state(const ConstrainedSystem& system, const StateQY& s) {
  if (s.q.size() != system.dim_q() || s.y.size() != system.rank_d())
    fail(ErrorKind::DimensionMismatch,
         "state (q, y) has lengths (" + std::to_string(s.q.size()) + ", " +
             std::to_string(s.y.size()) + "), system expects (" + std::to_string(system.dim_q()) +
             ", " + std::to_string(system.rank_d()) + ")");
}

Vec pack(const StateQY& s) {
  Vec x(s.q.size() + s.y.size());
  x << s.q, s.y;
  return x;
}

StateQY unpack(const Vec& x, Eigen::Index dim_q) {
  return {x.head(dim_q), x.tail(x.size() - dim_q)};
}

Vec pack_rate(const StateRate& r) {
  Vec x(r.q_dot.size() + r.y_dot.size());
  x << r.q_dot, r.y_dot;
  return x;
}

Trajectory run(const ConstrainedSystem& system, const ControlDistribution* controls,
               const ControlSignal* u, const StateQY& s0, const SimulationOptions& options) {
  check_state(system, s0);
  if (options.integrator == Integrator::stormer_verlet)
    fail(ErrorKind::InvalidArgument, "simulate supports rk4 and symp_euler");
  const std::vector<double> grid = time_grid(options.t_final, options.dt);
  const Eigen::Index nq = system.dim_q();

  auto control_at = [&](double t) -> Vec {
    Vec v = (*u)(t);
    if (v.size() != controls->inputs())
      fail(ErrorKind::DimensionMismatch, "control signal has length " + std::to_string(v.size()));
    return v;
  };
  auto rate = [&](double t, const Vec& x) -> Vec {
    const StateQY s = unpack(x, nq);
    if (controls) return pack_rate(controlled_field(system, *controls, s, control_at(t)));
    return pack_rate(nonholonomic_field(system, s));
  };

  Trajectory traj;
  traj.times = grid;
  Vec x = pack(s0);
  guard_finite(x, 0.0);
  auto record = [&](double t, const Vec& state) {
    const StateQY s = unpack(state, nq);
    traj.q.push_back(s.q);
    traj.y.push_back(s.y);
    traj.energy.push_back(energy(system, s));
    if (controls) traj.controls.push_back(control_at(t));
  };
  record(grid[0], x);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double t = grid[k];
    const double h = grid[k + 1] - t;
    if (options.integrator == Integrator::rk4) {
      const Vec k1 = rate(t, x);
      const Vec k2 = rate(t + 0.5 * h, x + 0.5 * h * k1);
      const Vec k3 = rate(t + 0.5 * h, x + 0.5 * h * k2);
      const Vec k4 = rate(t + h, x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } else {
      StateQY s = unpack(x, nq);
      const Vec r = rate(t, x);
      s.y += h * r.tail(system.rank_d());
      if (nq > 0) s.q += h * (system.geometry(s.q).anchor_d.transpose() * s.y);
      x = pack(s);
    }
    guard_finite(x, grid[k + 1]);
    record(grid[k + 1], x);
  }
  return traj;
}

}  // namespace

StateRate nonholonomic_field(const ConstrainedSystem& system, const StateQY& s) {
  check_state(system, s);
  const Geometry geo = system.geometry(s.q);
  return {geo.anchor_d.transpose() * s.y, -geo.bias(s.y)};
}

StateRate controlled_field(const ConstrainedSystem& system, const ControlDistribution& controls,
                           const StateQY& s, const Vec& u) {
  check_state(system, s);
  if (controls.rank_d() != system.rank_d())
    fail(ErrorKind::DimensionMismatch, "control distribution is over a different rank");
  if (u.size() != controls.inputs())
    fail(ErrorKind::DimensionMismatch, "control vector has length " + std::to_string(u.size()) +
                                           ", expected " + std::to_string(controls.inputs()));
  const Geometry geo = system.geometry(s.q);
  return {geo.anchor_d.transpose() * s.y, -geo.bias(s.y) + controls.input_matrix() * u};
}

double energy(const ConstrainedSystem& system, const StateQY& s) {
  return system.geometry(s.q).kinetic_energy(s.y) + system.potential(s.q);
}

Trajectory simulate(const ConstrainedSystem& system, const StateQY& s0,
                    const SimulationOptions& options) {
  return run(system, nullptr, nullptr, s0, options);
}

Trajectory simulate(const ConstrainedSystem& system, const ControlDistribution& controls,
                    const ControlSignal& u, const StateQY& s0, const SimulationOptions& options) {
  if (controls.rank_d() != system.rank_d())
    fail(ErrorKind::DimensionMismatch, "control distribution is over a different rank");
  return run(system, &controls, &u, s0, options);
}

Vec dalembert_oracle_field(const AlgebroidModel& model, const ConstraintSpec& spec, const Vec& xi) {
  if (model.dim_q() != 0)
    fail(ErrorKind::InvalidArgument, "the d'Alembert oracle is defined for Lie algebra models");
  const int n = model.rank_e();
  if (xi.size() != n) fail(ErrorKind::DimensionMismatch, "xi must have length rank_e");
  const Vec q(0);
  const Mat basis = adapted_d_basis(spec, n);
  const Mat mu = annihilator_matrix(spec, n);
  const Mat g = model.metric(q);
  if (!is_symmetric_positive_definite(g))
    fail(ErrorKind::SingularMetric, "bundle metric is not symmetric positive-definite");
  if (mu.rows() > 0 && (mu * xi).cwiseAbs().maxCoeff() > 1e-10)
    fail(ErrorKind::ConstraintViolated, "xi does not satisfy the constraint");

  // (ad*_xi m)_K = m_J xi^I C^J_IK
  const Tensor3 c = model.structure(q);
  const Vec m = g * xi;
  Vec coadjoint = Vec::Zero(n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) coadjoint[k] += m[j] * xi[i] * c(j, i, k);

  const Eigen::Index r = mu.rows();
  Mat kkt = Mat::Zero(n + r, n + r);
  kkt.topLeftCorner(n, n) = g;
  kkt.topRightCorner(n, r) = -mu.transpose();
  kkt.bottomLeftCorner(r, n) = mu;
  Vec rhs = Vec::Zero(n + r);
  rhs.head(n) = coadjoint;
  Eigen::FullPivLU<Mat> lu(kkt);
  if (!lu.isInvertible()) fail(ErrorKind::SingularMetric, "constrained inertia system is singular");
  const Vec xi_dot = lu.solve(rhs).head(n);
  // Express in the adapted basis (exact: xi_dot lies in D).
  return basis.colPivHouseholderQr().solve(xi_dot);
}

}  // namespace nhoc
