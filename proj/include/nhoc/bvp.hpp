#pragma once

#include "nhoc/hamiltonian.hpp"

namespace nhoc {

struct NewtonOptions {
  double tolerance = 1e-10;
  int max_iterations = 50;
  double fd_step = 1e-7;
  double damping = 0.5;
  int max_halvings = 20;
};

/// Two-point problem: from (q0, y0) reach (qT, yT) at the problem horizon by
/// choosing the initial momenta (p_q, p_y).
struct ShootingProblem {
  ShootingProblem(HamiltonianSystem hs, double dt, Integrator scheme = Integrator::rk4,
                  NewtonOptions newton = {});

  HamiltonianSystem hs;
  double dt;
  Integrator scheme;
  NewtonOptions newton;

  const Boundary& boundary() const noexcept { return hs.problem().boundary; }
  double horizon() const noexcept { return hs.problem().horizon; }
  int unknowns() const noexcept { return hs.dim_q() + hs.rank_d(); }
};

/// (q(T) - qT, y(T) - yT) after integrating from (q0, y0, p0).
Vec shooting_residual(const ShootingProblem& sp, const Vec& p0);

struct BvpResult {
  bool converged = false;
  Vec p0;                 ///< best iterate (p_q, p_y)
  int iterations = 0;
  double residual_norm = 0.0;  ///< max-norm of the residual at p0
  Trajectory trajectory;  ///< extremal from p0 with controls, energy and H
  double cost = 0.0;      ///< trapezoidal quadrature of C
  double max_hamiltonian_drift = 0.0;
  std::string message;
};

/// Damped Newton with a forward-difference Jacobian. Non-convergence is
/// reported through `converged = false` together with the best iterate;
/// a singular Jacobian raises SingularJacobian.
BvpResult solve_bvp(const ShootingProblem& sp, const Vec& p0_guess);

}  // namespace nhoc
