#include "doctest.h"

#include "nhoc/constrained_system.hpp"
#include "nhoc/error.hpp"
#include "nhoc/models.hpp"
#include "support.hpp"

using namespace nhoc;
using support::max_abs;

namespace {

Mat suslov_inertia(double i11, double i22, double i33, double i13, double i23) {
  Mat m(3, 3);
  m << i11, 0, i13, 0, i22, i23, i13, i23, i33;
  return m;
}

bool parallel(const Vec& a, const Vec& b, double tol) {
  const Vec u = a.normalized();
  const Vec v = b.normalized();
  return std::min((u - v).cwiseAbs().maxCoeff(), (u + v).cwiseAbs().maxCoeff()) < tol;
}

void check_splitting_invariants(const AlgebroidModel& model, const OrthogonalSplitting& s, const Vec& q) {
  const Mat g = model.metric(q);
  const int n = model.rank_e();
  CHECK(max_abs(Mat(s.projector_p * s.projector_p - s.projector_p)) < 1e-12);
  CHECK(max_abs(Mat(s.projector_p + s.projector_q - Mat::Identity(n, n))) < 1e-15);
  CHECK(max_abs(Mat(s.projector_p * s.d_basis - s.d_basis)) < 1e-12);
  support::Rng rng(11);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Vec v = rng.vec(n), w = rng.vec(n);
    worst = std::max(worst, std::abs((s.projector_p * v).dot(g * (s.projector_q * w))));
  }
  CHECK(worst < 1e-10);
}

}  // namespace

TEST_CASE("suslov splitting: D is the kernel of the annihilator and D-perp is G^-1 e3") {
  const ModelBundle b = make_suslov(2, 3, 4, 0.1, 0.2);
  const OrthogonalSplitting s = build_splitting(b.model, b.constraint, Vec());
  REQUIRE(s.d_basis.cols() == 2);
  REQUIRE(s.dperp_basis.cols() == 1);
  Mat mu(1, 3);
  mu << 0, 0, 1;
  CHECK(max_abs(Mat(mu * s.d_basis)) < 1e-15);
  Vec z(3);
  z << 3 * 0.1, 2 * 0.2, -2 * 3;
  CHECK(parallel(s.dperp_basis.col(0), z, 1e-12));
  check_splitting_invariants(b.model, s, Vec());
}

TEST_CASE("identity metric with the first k unit vectors gives a diagonal projector") {
  for (int k = 1; k <= 3; ++k) {
    Tensor3 c(4);
    const AlgebroidModel model = AlgebroidModel::lie_algebra(c, Mat::Identity(4, 4));
    const ConstraintSpec spec = ConstraintSpec::from_span(Mat::Identity(4, 4).leftCols(k));
    const OrthogonalSplitting s = build_splitting(model, spec, Vec());
    Mat expected = Mat::Zero(4, 4);
    expected.topLeftCorner(k, k) = Mat::Identity(k, k);
    CHECK(max_abs(Mat(s.projector_p - expected)) < 1e-15);
  }
}

TEST_CASE("chaplygin splitting: D-perp is the metric normal of v2 = 0") {
  const double m = 1.3, j = 0.7, a = 0.4, b = 0.25;
  const ModelBundle bundle = make_chaplygin(m, j, a, b);
  const OrthogonalSplitting s = build_splitting(bundle.model, bundle.constraint, Vec());
  // components in (E1, E2, E3)
  Vec z(3);
  z << m * a * b, j + m * a * a, m * a;
  CHECK(parallel(s.dperp_basis.col(0), z, 1e-12));
  Vec e3(3), e1(3);
  e3 << 0, 0, 1;
  e1 << 1, 0, 0;
  CHECK(max_abs(Vec(s.d_basis.col(0) - e3)) == 0.0);
  CHECK(max_abs(Vec(s.d_basis.col(1) - e1)) == 0.0);
  check_splitting_invariants(bundle.model, s, Vec());
}

TEST_CASE("span and annihilator of the same subspace give the same projector") {
  support::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Mat l = Mat::Random(4, 4);
    const Mat g = l * l.transpose() + 4 * Mat::Identity(4, 4);
    const AlgebroidModel model = AlgebroidModel::lie_algebra(Tensor3(4), g);
    Mat mu(2, 4);
    for (int i = 0; i < 2; ++i) mu.row(i) = rng.vec(4).transpose();
    const Mat kernel = canonical_kernel(mu);
    const OrthogonalSplitting from_mu = build_splitting(model, ConstraintSpec::from_annihilator(mu), Vec());
    const OrthogonalSplitting from_span = build_splitting(model, ConstraintSpec::from_span(kernel * Mat(Mat::Random(2, 2) + 3 * Mat::Identity(2, 2))), Vec());
    CHECK(max_abs(Mat(from_mu.projector_p - from_span.projector_p)) < 1e-10);
  }
}

TEST_CASE("canonical kernel basis is in reduced echelon form with +1 pivots") {
  Mat mu(1, 3);
  mu << 0, 0, 1;
  const Mat k = canonical_kernel(mu);
  CHECK(max_abs(Mat(k - Mat::Identity(3, 3).leftCols(2))) < 1e-14);
  Mat mu2(1, 3);
  mu2 << 1, -2, 0.5;
  const Mat k2 = canonical_kernel(mu2);
  CHECK(max_abs(Mat(mu2 * k2)) < 1e-14);
  CHECK(k2(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(k2(0, 1)) < 1e-14);
  CHECK(k2(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("dependent vectors or covectors are rejected") {
  const AlgebroidModel model = AlgebroidModel::lie_algebra(Tensor3(3), Mat::Identity(3, 3));
  Mat span(3, 2);
  span << 1, 2, 0, 0, 1, 2;
  CHECK_THROWS_AS(build_splitting(model, ConstraintSpec::from_span(span), Vec()), Error);
  try {
    build_splitting(model, ConstraintSpec::from_span(span), Vec());
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RankDeficient);
  }
  Mat mu(2, 3);
  mu << 1, 1, 0, 2, 2, 0;
  try {
    build_splitting(model, ConstraintSpec::from_annihilator(mu), Vec());
    FAIL("expected RankDeficient");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RankDeficient);
  }
}

TEST_CASE("indefinite metric is reported as singular") {
  Mat g = Mat::Identity(3, 3);
  g(2, 2) = -1.0;
  const AlgebroidModel model = AlgebroidModel::lie_algebra(Tensor3(3), g);
  Mat mu(1, 3);
  mu << 0, 0, 1;
  try {
    build_splitting(model, ConstraintSpec::from_annihilator(mu), Vec());
    FAIL("expected SingularMetric");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularMetric);
  }
}

TEST_CASE("suslov projected structure constants") {
  const ModelBundle b = make_suslov(2, 3, 4, 0.1, 0.2);
  const Tensor3 c = project_bracket(b.model, build_splitting(b.model, b.constraint, Vec()), Vec());
  CHECK(c(0, 0, 1) == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(c(1, 0, 1) == doctest::Approx(0.2 / 3).epsilon(1e-14));
  CHECK(c(0, 1, 0) == -c(0, 0, 1));
  CHECK(c(1, 1, 0) == -c(1, 0, 1));
  CHECK(std::abs(c(0, 0, 0)) + std::abs(c(1, 1, 1)) == 0.0);
}

TEST_CASE("diagonal inertia gives vanishing projected constants") {
  const ModelBundle b = make_suslov(1, 2, 3, 0, 0);
  CHECK(b.system().geometry(Vec()).structure_d.max_abs() < 1e-15);
}

TEST_CASE("chaplygin projected structure constants") {
  support::Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const double m = rng.uniform(0.5, 2), j = rng.uniform(0.5, 2), a = rng.uniform(-1, 1),
                 b = rng.uniform(-1, 1);
    const Tensor3 c = make_chaplygin(m, j, a, b).system().geometry(Vec()).structure_d;
    CHECK(std::abs(c(0, 0, 1) - m * a / (j + m * a * a)) < 1e-12);
    CHECK(std::abs(c(1, 0, 1) - m * a * b / (j + m * a * a)) < 1e-12);
  }
  const Tensor3 unit = make_chaplygin(1, 1, 1, 0).system().geometry(Vec()).structure_d;
  CHECK(unit(0, 0, 1) == doctest::Approx(0.5));
  CHECK(std::abs(unit(1, 0, 1)) < 1e-15);
  CHECK(make_chaplygin(1.5, 0.8, 0.0, 0.3).system().geometry(Vec()).structure_d.max_abs() < 1e-15);
}

TEST_CASE("abelian algebra projects to zero bracket") {
  Mat l = Mat::Random(4, 4);
  const Mat g = l * l.transpose() + Mat::Identity(4, 4);
  const AlgebroidModel model = AlgebroidModel::lie_algebra(Tensor3(4), g);
  Mat mu(1, 4);
  mu << 1, 2, 3, 4;
  const ConstrainedSystem system(model, ConstraintSpec::from_annihilator(mu));
  CHECK(system.geometry(Vec()).structure_d.max_abs() == 0.0);
}

TEST_CASE("projected structure functions are exactly antisymmetric") {
  for (const ModelBundle& b : {make_suslov(2, 3, 4, 0.1, 0.2), make_chaplygin(1.2, 0.9, 0.3, 0.7),
                               support::heisenberg_particle()}) {
    const ConstrainedSystem system = b.system();
    const Vec q = system.dim_q() ? Vec(Vec::Constant(system.dim_q(), 0.3)) : Vec();
    const Tensor3 c = system.geometry(q).structure_d;
    for (int k = 0; k < c.dim(); ++k)
      for (int a = 0; a < c.dim(); ++a)
        for (int bb = 0; bb < c.dim(); ++bb) CHECK(c(k, a, bb) + c(k, bb, a) == 0.0);
  }
}

TEST_CASE("restricted metrics") {
  const RestrictedMetric s = restrict_metric(
      make_suslov(2, 3, 4, 0.1, 0.2).model,
      build_splitting(make_suslov(2, 3, 4, 0.1, 0.2).model, make_suslov(2, 3, 4, 0.1, 0.2).constraint, Vec()),
      Vec());
  Mat expected(2, 2);
  expected << 2, 0, 0, 3;
  CHECK(max_abs(Mat(s.metric - expected)) < 1e-15);

  const double m = 1.1, j = 0.6, a = 0.8, b = -0.4;
  const ModelBundle c = make_chaplygin(m, j, a, b);
  const Geometry geo = c.system().geometry(Vec());
  Mat gc(2, 2);
  gc << j + m * (a * a + b * b), -b * m, -b * m, m;
  CHECK(max_abs(Mat(geo.metric_d - gc)) < 1e-14);
  CHECK(max_abs(Mat(geo.metric_d * geo.metric_d_inv - Mat::Identity(2, 2))) < 1e-12);

  const AlgebroidModel flat = AlgebroidModel::lie_algebra(Tensor3(3), Mat::Identity(3, 3));
  const RestrictedMetric r = restrict_metric(
      flat, build_splitting(flat, ConstraintSpec::from_span(Mat::Identity(3, 3).leftCols(2)), Vec()), Vec());
  CHECK(max_abs(Mat(r.metric - Mat::Identity(2, 2))) == 0.0);
}

TEST_CASE("suslov christoffel symbols against the hand-solved Koszul system") {
  const double i11 = 2, i22 = 3, c1 = 0.1 / 2, c2 = 0.2 / 3;
  const Tensor3 gamma = christoffel(make_suslov(2, 3, 4, 0.1, 0.2).system(), Vec()).gamma;
  // constant diagonal metric, only [e1, e2] = c1 e1 + c2 e2
  CHECK(gamma(0, 0, 1) == doctest::Approx(c1).epsilon(1e-14));
  CHECK(std::abs(gamma(0, 1, 0)) < 1e-15);
  CHECK(gamma(0, 1, 1) == doctest::Approx(i22 * c2 / i11).epsilon(1e-14));
  CHECK(gamma(0, 1, 1) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(gamma(1, 0, 0) == doctest::Approx(-i11 * c1 / i22).epsilon(1e-14));
  CHECK(std::abs(gamma(1, 0, 1)) < 1e-15);
  CHECK(gamma(1, 1, 0) == doctest::Approx(-c2).epsilon(1e-14));
  CHECK(std::abs(gamma(0, 0, 0)) + std::abs(gamma(1, 1, 1)) < 1e-15);
}

TEST_CASE("chaplygin christoffel symbols") {
  const Tensor3 gamma = christoffel(make_chaplygin(1, 1, 1, 0).system(), Vec()).gamma;
  CHECK(gamma(1, 0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
  support::Rng rng(2);
  for (int k = 0; k < 20; ++k) {
    const Vec y = rng.vec(2, 3.0);
    const Vec quad = gamma.contract(y);
    CHECK(std::abs(quad[0] - 0.5 * y[0] * y[1]) < 1e-13);
    CHECK(std::abs(quad[1] + y[0] * y[0]) < 1e-13);
  }
}

TEST_CASE("flat constant metric has zero connection") {
  Mat l = Mat::Random(3, 3);
  const AlgebroidModel model = AlgebroidModel::lie_algebra(Tensor3(3), l * l.transpose() + Mat::Identity(3, 3));
  CHECK(christoffel(ConstrainedSystem(model, ConstraintSpec::full(3)), Vec()).gamma.max_abs() == 0.0);
}

TEST_CASE("orthonormal frame reduces the connection to structure constants") {
  // Gamma^C_AB = 1/2 (C^B_CA + C^A_CB + C^C_AB) when the metric is the identity
  support::Rng rng(19);
  Tensor3 c(4);
  for (int k = 0; k < 4; ++k)
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        c(k, a, b) = rng.uniform(-1, 1);
        c(k, b, a) = -c(k, a, b);
      }
  const Tensor3 gamma =
      christoffel(ConstrainedSystem(AlgebroidModel::lie_algebra(c, Mat::Identity(4, 4)), ConstraintSpec::full(4)), Vec())
          .gamma;
  double worst = 0.0;
  for (int k = 0; k < 4; ++k)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        worst = std::max(worst, std::abs(gamma(k, a, b) - 0.5 * (c(b, k, a) + c(a, k, b) + c(k, a, b))));
  CHECK(worst < 1e-14);
}

TEST_CASE("tangent bundle in polar coordinates matches the classical symbols") {
  auto metric = [](const Vec& q) {
    Mat g = Mat::Identity(2, 2);
    g(1, 1) = q[0] * q[0];
    return g;
  };
  const ModelBundle polar = make_tangent_bundle("polar", 2, metric, [](const Vec&) { return 0.0; });
  Vec q(2);
  q << 1.7, 0.4;
  const Tensor3 gamma = christoffel(polar.system(), q).gamma;
  CHECK(gamma(0, 1, 1) == doctest::Approx(-1.7).epsilon(1e-9));
  CHECK(gamma(1, 0, 1) == doctest::Approx(1 / 1.7).epsilon(1e-9));
  CHECK(gamma(1, 1, 0) == doctest::Approx(1 / 1.7).epsilon(1e-9));
  CHECK(std::abs(gamma(0, 0, 0)) < 1e-9);
}

TEST_CASE("coordinate metric with cross terms matches the classical formula") {
  auto metric = [](const Vec& q) {
    Mat g(3, 3);
    g << 2 + std::sin(q[0]), 0.3 * q[1], 0.1, 0.3 * q[1], 1 + q[2] * q[2], 0.2 * q[0], 0.1, 0.2 * q[0],
        1.5 + 0.5 * std::cos(q[1]);
    return g;
  };
  const ConstrainedSystem system =
      make_tangent_bundle("curved", 3, metric, [](const Vec&) { return 0.0; }).system();
  support::Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec q = rng.vec(3, 0.8);
    const Tensor3 got = christoffel(system, q).gamma;
    const Tensor3 ref = support::classical_christoffel(metric, q);
    CHECK(max_abs_diff(got, ref) < 1e-7);
  }
}

TEST_CASE("koszul, metricity and torsion identities on a q-dependent algebroid") {
  const ConstrainedSystem system = support::heisenberg_particle().system();
  support::Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec q = rng.vec(3);
    const Geometry geo = system.geometry(q);
    for (int c = 0; c < 2; ++c)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          CHECK(std::abs(geo.christoffel.gamma(c, a, b) - geo.christoffel.gamma(c, b, a) -
                         geo.structure_d(c, a, b)) < 1e-10);
    for (int k = 0; k < 10; ++k) {
      const Vec y = rng.vec(2), z = rng.vec(2), w = rng.vec(2);
      CHECK(koszul_residual(system, q, y, z, w) < 1e-8);
      CHECK(metricity_residual(system, q, y, z, w) < 1e-8);
    }
  }
  CHECK(system.geometry(Vec::Constant(3, 0.2)).structure_d.max_abs() > 0.1);
}

TEST_CASE("analytic partials tighten the Koszul residual") {
  auto metric = [](const Vec& q) {
    Mat g = Mat::Identity(2, 2);
    g(0, 0) = 1 + q[1] * q[1];
    g(0, 1) = g(1, 0) = 0.5 * q[0];
    g(1, 1) = 2;
    return g;
  };
  ModelPartials partials;
  partials.metric = [](const Vec& q) {
    Mat d0 = Mat::Zero(2, 2), d1 = Mat::Zero(2, 2);
    d0(0, 1) = d0(1, 0) = 0.5;
    d1(0, 0) = 2 * q[1];
    return std::vector<Mat>{d0, d1};
  };
  const ConstrainedSystem system =
      make_tangent_bundle("analytic", 2, metric, [](const Vec&) { return 0.0; }, partials).system();
  support::Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    const Vec q = rng.vec(2, 0.5);
    CHECK(koszul_residual(system, q, rng.vec(2), rng.vec(2), rng.vec(2)) < 1e-12);
  }
  const ConstrainedSystem heis = support::heisenberg_particle(true).system();
  for (int k = 0; k < 20; ++k) {
    const Vec q = rng.vec(3);
    CHECK(koszul_residual(heis, q, rng.vec(2), rng.vec(2), rng.vec(2)) < 1e-12);
    CHECK(metricity_residual(heis, q, rng.vec(2), rng.vec(2), rng.vec(2)) < 1e-12);
  }
}

TEST_CASE("potential gradients") {
  CHECK(max_abs(grad_potential(make_suslov(2, 3, 4, 0.1, 0.2).system(), Vec())) == 0.0);
  CHECK(grad_potential(make_suslov(2, 3, 4, 0.1, 0.2).system(), Vec()).size() == 2);

  const ConstrainedSystem spring = make_tangent_bundle(
      "spring", 1, [](const Vec&) { return Mat::Identity(1, 1); },
      [](const Vec& q) { return 0.5 * q[0] * q[0]; }).system();
  Vec q(1);
  q << 0.37;
  CHECK(grad_potential(spring, q)[0] == doctest::Approx(0.37).epsilon(1e-9));

  const ConstrainedSystem heavy = make_tangent_bundle(
      "heavy", 1, [](const Vec&) { return Mat::Constant(1, 1, 2.0); },
      [](const Vec& x) { return x[0]; }).system();
  CHECK(grad_potential(heavy, q)[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("constant geometry rejects a non-empty chart point") {
  try {
    make_suslov(2, 3, 4, 0.1, 0.2).system().geometry(Vec::Zero(1));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}
