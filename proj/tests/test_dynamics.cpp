#include "doctest.h"

#include <cmath>

#include "nhoc/dynamics.hpp"
#include "nhoc/error.hpp"
#include "nhoc/models.hpp"
#include "support.hpp"

using namespace nhoc;
using support::max_abs;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Eigen::Vector3d so3_bracket(const Eigen::Vector3d& x, const Eigen::Vector3d& y) { return x.cross(y); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("nonholonomic field on the sleigh") {
  const ConstrainedSystem sys = make_chaplygin(1, 1, 1, 0).system();
  const StateRate r = nonholonomic_field(sys, {Vec(), v2(1, 2)});
  CHECK(max_abs(Vec(r.y_dot - v2(-1, 1))) < 1e-14);
  CHECK(r.q_dot.size() == 0);
}

TEST_CASE("nonholonomic field on the suslov body matches the Euler equations") {
  const ConstrainedSystem sys = make_suslov(2, 3, 4, 0.1, 0.2).system();
  const StateRate r = nonholonomic_field(sys, {Vec(), v2(1, 1)});
  CHECK(max_abs(Vec(r.y_dot - v2(-0.15, 0.1))) < 1e-14);
  Mat inertia(3, 3);
  inertia << 2, 0, 0.1, 0, 3, 0.2, 0.1, 0.2, 4;
  support::Rng rng(1);
  for (int k = 0; k < 50; ++k) {
    const Vec y = rng.vec(2, 3);
    const Vec ref = support::suslov_rate(inertia, Eigen::Vector2d(y[0], y[1]));
    CHECK(max_abs(Vec(nonholonomic_field(sys, {Vec(), y}).y_dot - ref)) < 1e-12);
  }
}

TEST_CASE("flat model has constant velocity") {
  const ConstrainedSystem sys = make_double_integrator(2).system();
  const StateRate r = nonholonomic_field(sys, {v2(0.3, -1), v2(2, 5)});
  CHECK(max_abs(r.y_dot) == 0.0);
  CHECK(max_abs(Vec(r.q_dot - v2(2, 5))) == 0.0);
}

TEST_CASE("field, KKT oracle and null-space oracle agree on random states") {
  support::Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const double i11 = rng.uniform(1, 3), i22 = rng.uniform(1, 3), i33 = rng.uniform(1, 3),
                 i13 = rng.uniform(-0.3, 0.3), i23 = rng.uniform(-0.3, 0.3);
    const ModelBundle sus = make_suslov(i11, i22, i33, i13, i23);
    const double m = rng.uniform(0.5, 2), j = rng.uniform(0.5, 2), a = rng.uniform(-1, 1),
                 b = rng.uniform(-1, 1);
    const ModelBundle sle = make_chaplygin(m, j, a, b);
    for (const auto* bundle : {&sus, &sle}) {
      const ConstrainedSystem sys = bundle->system();
      const Mat g = bundle->model.metric(Vec());
      for (int k = 0; k < 20; ++k) {
        const Vec y = rng.vec(2, 2);
        const Vec field = nonholonomic_field(sys, {Vec(), y}).y_dot;
        const Vec kkt = dalembert_oracle_field(bundle->model, bundle->constraint, sys.d_basis() * y);
        const Vec ns = support::nullspace_rate(bundle == &sus ? so3_bracket : support::se2_bracket, g,
                                               sys.d_basis(), y);
        CHECK(max_abs(Vec(field - kkt)) < 1e-10);
        CHECK(max_abs(Vec(field - ns)) < 1e-10);
      }
    }
  }
}

TEST_CASE("sleigh classical limit") {
  support::Rng rng(8);
  for (int k = 0; k < 30; ++k) {
    const double m = rng.uniform(0.5, 2), j = rng.uniform(0.5, 2), a = rng.uniform(-1, 1);
    const Vec y = rng.vec(2, 2);
    const Vec field = nonholonomic_field(make_chaplygin(m, j, a, 0).system(), {Vec(), y}).y_dot;
    CHECK(max_abs(Vec(field - support::sleigh_rate(m, j, a, y))) < 1e-12);
  }
}

TEST_CASE("q-dependent algebroid matches coordinate Lagrange-d'Alembert") {
  const ConstrainedSystem sys = support::heisenberg_particle().system();
  auto frame = [](const Vec& q) {
    Mat f = Mat::Identity(3, 3);
    f(2, 1) = q[0];
    return f;
  };
  support::Rng rng(31);
  for (int k = 0; k < 10; ++k) {
    const Vec q = rng.vec(3);
    const Vec y = rng.vec(2);
    const StateRate r = nonholonomic_field(sys, {q, y});
    const Vec xi = sys.d_basis() * y;
    const Vec qdot = frame(q) * xi;
    CHECK(max_abs(Vec(r.q_dot - qdot)) < 1e-14);
    const Vec qddot = support::heisenberg_accel(q, qdot);
    const double h = 1e-6;
    const Mat dfinv = (frame(q + h * qdot).inverse() - frame(q - h * qdot).inverse()) / (2 * h);
    const Vec xidot = dfinv * qdot + frame(q).inverse() * qddot;
    CHECK(std::abs(xidot[2]) < 1e-7);
    CHECK(max_abs(Vec(r.y_dot - xidot.head(2))) < 1e-6);
  }
}

TEST_CASE("controlled field adds the inputs") {
  const ConstrainedSystem sle = make_chaplygin(1, 1, 1, 0).system();
  const ControlDistribution full = ControlDistribution::full(2);
  const StateQY s{Vec(), v2(1, 2)};
  CHECK(max_abs(Vec(controlled_field(sle, full, s, Vec::Zero(2)).y_dot - nonholonomic_field(sle, s).y_dot)) == 0.0);
  CHECK(max_abs(controlled_field(sle, full, s, v2(1, -1)).y_dot) < 1e-14);
  const ConstrainedSystem sus = make_suslov(2, 3, 4, 0.1, 0.2).system();
  CHECK(max_abs(controlled_field(sus, full, {Vec(), v2(1, 1)}, v2(0.15, -0.1)).y_dot) < 1e-14);
  Mat y(2, 1);
  y << 1, 2;
  const ControlDistribution skew = ControlDistribution::from_matrix(y);
  Vec u(1);
  u << 0.5;
  const Vec expected = nonholonomic_field(sle, s).y_dot + 0.5 * v2(1, 2);
  CHECK(max_abs(Vec(controlled_field(sle, skew, s, u).y_dot - expected)) < 1e-14);
  CHECK(kind_of([&] { controlled_field(sle, full, s, Vec::Zero(3)); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("flat model drifts linearly") {
  const ConstrainedSystem sys = make_double_integrator(2).system();
  const Trajectory t = simulate(sys, {v2(0.5, -0.5), v2(1, 0)}, {1.0, 0.01, Integrator::rk4});
  CHECK(t.size() == 101);
  CHECK(max_abs(Vec(t.y.back() - v2(1, 0))) < 1e-15);
  CHECK(max_abs(Vec(t.q.back() - v2(1.5, -0.5))) < 1e-13);
}

TEST_CASE("time grid") {
  const std::vector<double> g = time_grid(1.0, 1e-3);
  CHECK(g.size() == 1001);
  CHECK(g.back() == 1.0);
  const std::vector<double> uneven = time_grid(1.0, 0.3);
  CHECK(uneven.size() == 5);
  CHECK(uneven.back() == 1.0);
  CHECK(kind_of([] { time_grid(1.0, -1.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("uncontrolled energy conservation with RK4") {
  for (const ModelBundle& b : {make_suslov(2, 3, 4, 0.1, 0.2), make_chaplygin(1, 1, 1, 0.5)}) {
    const Trajectory t = simulate(b.system(), {Vec(), v2(1.0, -0.7)}, {10.0, 1e-3, Integrator::rk4});
    double drift = 0.0;
    for (double e : t.energy) drift = std::max(drift, std::abs(e - t.energy.front()));
    CHECK(drift / std::max(1.0, std::abs(t.energy.front())) < 1e-8);
  }
}

TEST_CASE("sleigh from rest in the lateral direction follows the closed form") {
  // w = sech(t / sqrt 2), v = sqrt 2 tanh(t / sqrt 2) for m = J = a = 1, b = 0
  const Trajectory t = simulate(make_chaplygin(1, 1, 1, 0).system(), {Vec(), v2(1, 0)}, {2.0, 1e-3, Integrator::rk4});
  double err = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double s = t.times[k] / std::sqrt(2.0);
    err = std::max(err, std::abs(t.y[k][0] - 1 / std::cosh(s)));
    err = std::max(err, std::abs(t.y[k][1] - std::sqrt(2.0) * std::tanh(s)));
  }
  CHECK(err < 1e-11);
}

TEST_CASE("RK4 converges with order four") {
  const ConstrainedSystem sys = make_chaplygin(1, 1, 1, 0.3).system();
  const StateQY s0{Vec(), v2(1.2, -0.4)};
  const double t_final = 2.0, dt = 0.1;
  const Vec ref = simulate(sys, s0, {t_final, dt / 100, Integrator::rk4}).y.back();
  const double e1 = max_abs(Vec(simulate(sys, s0, {t_final, dt, Integrator::rk4}).y.back() - ref));
  const double e2 = max_abs(Vec(simulate(sys, s0, {t_final, dt / 2, Integrator::rk4}).y.back() - ref));
  const double ratio = e1 / e2;
  CHECK(ratio >= 14.0);
  CHECK(ratio <= 18.0);
}

TEST_CASE("symplectic Euler is first order and verlet is not a simulate scheme") {
  const ConstrainedSystem sys = make_double_integrator(1).system();
  Vec one(1);
  one << 1;
  const Trajectory t = simulate(sys, {Vec::Zero(1), one}, {1.0, 0.1, Integrator::symplectic_euler});
  CHECK(t.q.back()[0] == doctest::Approx(1.0));
  CHECK(kind_of([&] { simulate(sys, {Vec::Zero(1), one}, {1.0, 0.1, Integrator::stormer_verlet}); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("blow-up is reported") {
  const ConstrainedSystem sys = make_tangent_bundle(
      "quartic", 1, [](const Vec&) { return Mat::Identity(1, 1); },
      [](const Vec& q) { return -std::pow(q[0], 4); }).system();
  Vec q(1), y(1);
  q << 1;
  y << 1;
  CHECK(kind_of([&] { simulate(sys, {q, y}, {10.0, 1e-3, Integrator::rk4}); }) == ErrorKind::NonFiniteState);
}

TEST_CASE("trajectories are admissible") {
  const ConstrainedSystem sys = support::heisenberg_particle().system();
  Vec q0(3);
  q0 << 0.1, -0.2, 0.3;
  const double dt = 1e-3;
  const Trajectory t = simulate(sys, {q0, v2(0.5, 0.8)}, {0.5, dt, Integrator::rk4});
  double err = 0.0;
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    const Vec fd = (t.q[k + 1] - t.q[k - 1]) / (2 * dt);
    const Vec exact = nonholonomic_field(sys, {t.q[k], t.y[k]}).q_dot;
    err = std::max(err, max_abs(Vec(fd - exact)));
  }
  CHECK(err < 10 * dt * dt);
}

TEST_CASE("controlled simulation records the controls") {
  const ConstrainedSystem sys = make_double_integrator(1).system();
  const ControlSignal u = [](double) { return Vec::Constant(1, 2.0); };
  const Trajectory t = simulate(sys, ControlDistribution::full(1), u, {Vec::Zero(1), Vec::Zero(1)}, {1.0, 0.01, Integrator::rk4});
  REQUIRE(t.controls.size() == t.size());
  CHECK(t.controls[5][0] == 2.0);
  CHECK(t.y.back()[0] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(t.q.back()[0] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("d'Alembert oracle edge cases") {
  const ModelBundle diag = make_suslov(1, 2, 3, 0, 0);
  Vec xi(3);
  xi << 0.4, -1.1, 0;
  CHECK(max_abs(dalembert_oracle_field(diag.model, diag.constraint, xi)) < 1e-15);
  const ModelBundle sus = make_suslov(2, 3, 4, 0.1, 0.2);
  xi << 1, 1, 0;
  CHECK(max_abs(Vec(dalembert_oracle_field(sus.model, sus.constraint, xi) - v2(-0.15, 0.1))) < 1e-14);
  const ModelBundle sle = make_chaplygin(1, 1, 1, 0);
  xi << 2, 0, 1;  // y = (1, 2) in the (E3, E1) basis
  CHECK(max_abs(Vec(dalembert_oracle_field(sle.model, sle.constraint, xi) - v2(-1, 1))) < 1e-14);
  xi << 0, 0, 1;
  CHECK(kind_of([&] { dalembert_oracle_field(sus.model, sus.constraint, xi); }) == ErrorKind::ConstraintViolated);
}
