#include "nhoc/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "nhoc/error.hpp"

namespace nhoc {

Integrator parse_integrator(std::string_view name) {
  if (name == "rk4") return Integrator::rk4;
  if (name == "symp_euler") return Integrator::symplectic_euler;
  if (name == "stormer_verlet" || name == "verlet") return Integrator::stormer_verlet;
  fail(ErrorKind::InvalidArgument, "unknown integrator '" + std::string(name) + "'");
}

const char* to_string(Integrator integrator) {
  switch (integrator) {
    case Integrator::rk4: return "rk4";
    case Integrator::symplectic_euler: return "symp_euler";
    case Integrator::stormer_verlet: return "stormer_verlet";
  }
  return "?";
}

void Trajectory::validate() const {
  const std::size_t n = times.size();
  auto check = [n](std::size_t len, const char* what, bool optional) {
    if (len != n && !(optional && len == 0))
      fail(ErrorKind::ValidationError, std::string(what) + " has " + std::to_string(len) +
                                           " samples, expected " + std::to_string(n));
  };
  check(q.size(), "q", false);
  check(y.size(), "y", false);
  check(energy.size(), "energy", false);
  check(p_q.size(), "p_q", true);
  check(p_y.size(), "p_y", true);
  check(controls.size(), "controls", true);
  check(hamiltonian.size(), "hamiltonian", true);
  for (std::size_t i = 1; i < n; ++i)
    if (!(times[i] > times[i - 1])) fail(ErrorKind::ValidationError, "times not strictly increasing");
}

std::vector<double> time_grid(double t_final, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorKind::InvalidArgument, "dt must be positive");
  if (!(t_final > 0.0) || !std::isfinite(t_final))
    fail(ErrorKind::InvalidArgument, "final time must be positive");
  const double ratio = t_final / dt;
  auto steps = static_cast<long long>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio))
    steps = static_cast<long long>(std::ceil(ratio));
  steps = std::max(1LL, steps);
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (long long k = 0; k < steps; ++k) t[static_cast<std::size_t>(k)] = static_cast<double>(k) * dt;
  t.back() = t_final;
  return t;
}

std::function<Vec(double)> interpolate_controls(std::vector<double> times, std::vector<Vec> controls) {
  if (times.size() != controls.size() || times.empty())
    fail(ErrorKind::DimensionMismatch, "control samples and times differ in length");
  return [t = std::move(times), u = std::move(controls)](double s) -> Vec {
    if (s <= t.front()) return u.front();
    if (s >= t.back()) return u.back();
    const auto it = std::upper_bound(t.begin(), t.end(), s);
    const std::size_t hi = static_cast<std::size_t>(it - t.begin());
    const std::size_t lo = hi - 1;
    const double w = (s - t[lo]) / (t[hi] - t[lo]);
    return (1.0 - w) * u[lo] + w * u[hi];
  };
}

void guard_finite(const Vec& x, double t) {
  if (!x.allFinite() || (x.size() > 0 && x.cwiseAbs().maxCoeff() > kBlowUpBound))
    fail(ErrorKind::NonFiniteState, "state left the finite range at t = " + std::to_string(t));
}

}  // namespace nhoc
