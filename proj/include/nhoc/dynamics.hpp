#pragma once

#include <functional>

#include "nhoc/constrained_system.hpp"
#include "nhoc/controls.hpp"
#include "nhoc/trajectory.hpp"

namespace nhoc {

/// Point of D in induced coordinates (q^i, y^A).
struct StateQY {
  Vec q;
  Vec y;
};

struct StateRate {
  Vec q_dot;
  Vec y_dot;
};

/// q' = rho_D^T y,  y' = -Gamma(y, y) - grad V.
StateRate nonholonomic_field(const ConstrainedSystem& system, const StateQY& s);

/// Same as nonholonomic_field with the forcing Y u added to y'.
StateRate controlled_field(const ConstrainedSystem& system, const ControlDistribution& controls,
                           const StateQY& s, const Vec& u);

/// 1/2 G^D(y, y) + V(q).
double energy(const ConstrainedSystem& system, const StateQY& s);

struct SimulationOptions {
  double t_final = 1.0;
  double dt = 1e-3;
  Integrator integrator = Integrator::rk4;
};

using ControlSignal = std::function<Vec(double)>;

/// Fixed-step integration of the uncontrolled flow. symp_euler updates y
/// first and then advances q with the new y.
Trajectory simulate(const ConstrainedSystem& system, const StateQY& s0,
                    const SimulationOptions& options);

/// Controlled flow driven by u(t); the sampled controls are stored in the trajectory.
Trajectory simulate(const ConstrainedSystem& system, const ControlDistribution& controls,
                    const ControlSignal& u, const StateQY& s0, const SimulationOptions& options);

/// Independent Lagrange-d'Alembert evaluation for a Lie algebra model:
/// solves  G xi' = ad*_xi(G xi) + mu^T lambda,  mu xi' = 0  for (xi', lambda)
/// and returns xi' in the adapted basis of D. `xi` is a full fiber vector in D.
Vec dalembert_oracle_field(const AlgebroidModel& model, const ConstraintSpec& spec, const Vec& xi);

}  // namespace nhoc
