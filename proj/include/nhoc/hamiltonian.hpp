#pragma once

#include "nhoc/optimal_control.hpp"
#include "nhoc/trajectory.hpp"

namespace nhoc {

/// Canonical coordinates on T*D, packed as (q, y, p_q, p_y).
struct PhasePoint {
  Vec q, y, p_q, p_y;
};

Vec pack(const PhasePoint& z);
PhasePoint unpack_phase(const Vec& x, int dim_q, int rank_d);

struct RegularityReport {
  Mat matrix_m;
  double determinant = 0.0;
  double condition = 0.0;
  bool is_regular = false;
};

/// Bordered Hessian of the extended Lagrangian in the velocities (y', q')
/// and the multipliers lambda:
///   [ d2L/dy'dy'  0  0 ]
///   [ 0           0  I ]
///   [ 0           I  0 ]
/// so det M = (-1)^dim_q det(d2L/dy'dy'). Regular when |det| > 1e-10 * max(1, |M|_max)^size.
RegularityReport regularity_matrix(const OCProblem& problem, const ExtremalState& state);

PhasePoint legendre_map(const OCProblem& problem, const ExtremalState& state);

/// Quadratic costs invert in closed form; others by damped Newton on the
/// controls (tolerance 1e-12, at most 50 iterations).
ExtremalState inverse_legendre(const OCProblem& problem, const PhasePoint& phase);

/// Optimal-control Hamiltonian on T*D for a fully actuated problem.
/// Quadratic costs use H = 1/2 p^T S p - p . bias(q, y) + p_q . rho_D^T y with
/// S = Y W^{-1} Y^T and analytic partials; other costs go through the inverse
/// Legendre map and central differences.
class HamiltonianSystem {
 public:
  explicit HamiltonianSystem(OCProblem problem);

  const OCProblem& problem() const noexcept { return problem_; }
  int dim_q() const noexcept { return problem_.dim_q(); }
  int rank_d() const noexcept { return problem_.rank_d(); }
  int phase_dim() const noexcept { return 2 * (dim_q() + rank_d()); }
  bool closed_form() const noexcept { return problem_.cost.is_quadratic(); }

  double value(const PhasePoint& z) const;
  /// dH/d(q, y, p_q, p_y), analytic when closed_form().
  Vec gradient(const PhasePoint& z) const;
  /// Central-difference gradient (step 1e-6) regardless of the cost type.
  Vec gradient_fd(const PhasePoint& z) const;

 private:
  double closed_form_value(const PhasePoint& z) const;
  Vec closed_form_gradient(const PhasePoint& z) const;

  OCProblem problem_;
  Mat s_;  ///< Y W^{-1} Y^T for quadratic costs
};

double hamiltonian_eval(const HamiltonianSystem& hs, const PhasePoint& z);

/// (q', y', p_q', p_y') = (dH/dp_q, dH/dp_y, -dH/dq, -dH/dy).
PhasePoint hamiltonian_field(const HamiltonianSystem& hs, const PhasePoint& z);

/// Fixed-point settings for the implicit stages of the symplectic schemes.
inline constexpr double kFixedPointTolerance = 1e-12;
inline constexpr int kFixedPointMaxIterations = 100;

/// One step. symp_euler and stormer_verlet treat (q, y) as positions and
/// (p_q, p_y) as momenta; their implicit stages use fixed-point iteration.
PhasePoint integrate_step(const HamiltonianSystem& hs, const PhasePoint& z, double dt,
                          Integrator scheme);

/// |DPsi^T J DPsi - J|_max with DPsi from central differences (step 1e-6).
double symplecticity_defect(const HamiltonianSystem& hs, const PhasePoint& z, double dt,
                            Integrator scheme);

/// Integrates Hamilton's equations and records states, momenta, recovered
/// controls, energy l(y) + V(q) and H along the way.
Trajectory integrate_hamiltonian(const HamiltonianSystem& hs, const PhasePoint& z0, double t_final,
                                 double dt, Integrator scheme);

/// Trapezoidal quadrature of the running cost over a trajectory with controls.
double trajectory_cost(const OCProblem& problem, const Trajectory& traj);

}  // namespace nhoc
