#include "nhoc/bvp.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "nhoc/error.hpp"

namespace nhoc {

namespace {

PhasePoint initial_phase(const ShootingProblem& sp, const Vec& p0) {
  const int nq = sp.hs.dim_q();
  return {sp.boundary().q0, sp.boundary().y0, p0.head(nq), p0.tail(sp.hs.rank_d())};
}

double max_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

ShootingProblem::ShootingProblem(HamiltonianSystem hs_in, double dt_in, Integrator scheme_in,
                                 NewtonOptions newton_in)
    : hs(std::move(hs_in)), dt(dt_in), scheme(scheme_in), newton(newton_in) {
  if (!(newton.tolerance > 0.0)) fail(ErrorKind::InvalidArgument, "Newton tolerance must be positive");
  if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "dt must be positive");
  const double ratio = horizon() / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    fail(ErrorKind::InvalidArgument, "dt must divide the horizon");
}

Vec shooting_residual(const ShootingProblem& sp, const Vec& p0) {
  if (p0.size() != sp.unknowns())
    fail(ErrorKind::DimensionMismatch, "initial momenta must have length dim_q + rank_d");
  PhasePoint z = initial_phase(sp, p0);
  const std::vector<double> grid = time_grid(sp.horizon(), sp.dt);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k)
    z = integrate_step(sp.hs, z, grid[k + 1] - grid[k], sp.scheme);
  Vec r(sp.unknowns());
  r << z.q - sp.boundary().qT, z.y - sp.boundary().yT;
  return r;
}

BvpResult solve_bvp(const ShootingProblem& sp, const Vec& p0_guess) {
  if (p0_guess.size() != sp.unknowns())
    fail(ErrorKind::DimensionMismatch, "initial guess must have length dim_q + rank_d");
  if (!p0_guess.allFinite()) fail(ErrorKind::InvalidArgument, "initial guess is not finite");
  const NewtonOptions& opt = sp.newton;
  const Eigen::Index n = sp.unknowns();

  BvpResult out;
  Vec p = p0_guess;
  Vec r = shooting_residual(sp, p);
  double norm = max_norm(r);
  while (norm >= opt.tolerance && out.iterations < opt.max_iterations) {
    Mat jac(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      Vec pj = p;
      pj[j] += opt.fd_step;
      jac.col(j) = (shooting_residual(sp, pj) - r) / opt.fd_step;
    }
    Eigen::FullPivLU<Mat> lu(jac);
    if (!jac.allFinite() || !lu.isInvertible())
      fail(ErrorKind::SingularJacobian, "shooting Jacobian is singular at iteration " +
                                            std::to_string(out.iterations));
    const Vec step = lu.solve(-r);
    ++out.iterations;

    double alpha = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= opt.max_halvings; ++halving, alpha *= opt.damping) {
      const Vec trial = p + alpha * step;
      Vec r_trial;
      try {
        r_trial = shooting_residual(sp, trial);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonFiniteState && e.kind() != ErrorKind::FixedPointDivergence) throw;
        continue;
      }
      if (max_norm(r_trial) < norm) {
        p = trial;
        r = std::move(r_trial);
        norm = max_norm(r);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.message = "damped Newton step failed to reduce the residual";
      break;
    }
  }

  out.converged = norm < opt.tolerance;
  if (!out.converged && out.message.empty())
    out.message = "Newton iteration limit reached";
  out.p0 = p;
  out.residual_norm = norm;
  out.trajectory =
      integrate_hamiltonian(sp.hs, initial_phase(sp, p), sp.horizon(), sp.dt, sp.scheme);
  out.cost = trajectory_cost(sp.hs.problem(), out.trajectory);
  const double h0 = out.trajectory.hamiltonian.front();
  for (double h : out.trajectory.hamiltonian)
    out.max_hamiltonian_drift = std::max(out.max_hamiltonian_drift, std::abs(h - h0));
  return out;
}

}  // namespace nhoc
