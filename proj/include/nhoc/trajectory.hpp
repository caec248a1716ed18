#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "nhoc/types.hpp"

namespace nhoc {

enum class Integrator { rk4, symplectic_euler, stormer_verlet };

Integrator parse_integrator(std::string_view name);
const char* to_string(Integrator integrator);

/// Time-indexed samples. q, y and energy are always filled; momenta, controls
/// and hamiltonian are either empty or have one entry per sample.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> q;
  std::vector<Vec> y;
  std::vector<Vec> p_q;
  std::vector<Vec> p_y;
  std::vector<Vec> controls;
  std::vector<double> energy;
  std::vector<double> hamiltonian;

  std::size_t size() const noexcept { return times.size(); }
  /// Throws ValidationError on length mismatch or non-increasing times.
  void validate() const;
};

/// Sample instants 0, dt, 2 dt, ..., t_final. The last step is shortened when
/// dt does not divide t_final (within 1e-9 relative).
std::vector<double> time_grid(double t_final, double dt);

/// Piecewise-linear interpolation of sampled controls, clamped at the ends.
std::function<Vec(double)> interpolate_controls(std::vector<double> times, std::vector<Vec> controls);

/// Largest magnitude allowed in an integrated state before it is treated as a blow-up.
inline constexpr double kBlowUpBound = 1e12;

/// Throws NonFiniteState when x has a non-finite entry or one above kBlowUpBound.
void guard_finite(const Vec& x, double t);

}  // namespace nhoc
