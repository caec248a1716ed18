#include "nhoc/constrained_system.hpp"

#include <utility>

#include "nhoc/error.hpp"
#include "nhoc/numdiff.hpp"

namespace nhoc {

namespace {

/// D_A f for a matrix field f = G^D: sum_i (rho_D)^i_A dG^D/dq^i.
std::vector<Mat> directional_metric_derivatives(const Mat& anchor_d, const std::vector<Mat>& dg) {
  const Eigen::Index rank_d = anchor_d.rows();
  std::vector<Mat> out(static_cast<std::size_t>(rank_d), Mat::Zero(rank_d, rank_d));
  for (Eigen::Index a = 0; a < rank_d; ++a)
    for (std::size_t i = 0; i < dg.size(); ++i)
      out[static_cast<std::size_t>(a)] += anchor_d(a, static_cast<Eigen::Index>(i)) * dg[i];
  return out;
}

/// Derivative of G^D(z, w) along the anchored direction y.
double derivative_along(const std::vector<Mat>& dirs, const Vec& y, const Vec& z, const Vec& w) {
  double s = 0.0;
  for (Eigen::Index a = 0; a < y.size(); ++a) s += y[a] * z.dot(dirs[static_cast<std::size_t>(a)] * w);
  return s;
}

ChristoffelField solve_koszul(const Tensor3& cd, const Mat& anchor_d, const Mat& gd,
                              const Mat& gd_inv, const std::vector<Mat>& dgd) {
  const int n = cd.dim();
  const std::vector<Mat> dir = directional_metric_derivatives(anchor_d, dgd);
  // lowered(K, A, B) = G^D_KM C^M_AB
  Tensor3 lowered(n);
  for (int k = 0; k < n; ++k)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double s = 0.0;
        for (int m = 0; m < n; ++m) s += gd(k, m) * cd(m, a, b);
        lowered(k, a, b) = s;
      }
  ChristoffelField out{Tensor3(n)};
  Vec rhs(n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        const double metric_terms = dir[static_cast<std::size_t>(a)](b, c) +
                                    dir[static_cast<std::size_t>(b)](a, c) -
                                    dir[static_cast<std::size_t>(c)](a, b);
        const double bracket_terms = lowered(a, c, b) + lowered(b, c, a) - lowered(c, b, a);
        rhs[c] = 0.5 * (metric_terms + bracket_terms);
      }
      const Vec gamma_ab = gd_inv * rhs;
      for (int c = 0; c < n; ++c) out.gamma(c, a, b) = gamma_ab[c];
    }
  }
  return out;
}

}  // namespace

Vec Geometry::bias(const Vec& y) const { return christoffel.quadratic(y) + grad_potential; }

Mat Geometry::bias_jacobian_y(const Vec& y) const {
  const int n = christoffel.gamma.dim();
  Mat jac = Mat::Zero(n, n);
  for (int c = 0; c < n; ++c)
    for (int d = 0; d < n; ++d) {
      double s = 0.0;
      for (int b = 0; b < n; ++b)
        s += (christoffel.gamma(c, d, b) + christoffel.gamma(c, b, d)) * y[b];
      jac(c, d) = s;
    }
  return jac;
}

double Geometry::kinetic_energy(const Vec& y) const { return 0.5 * y.dot(metric_d * y); }

ConstrainedSystem::ConstrainedSystem(AlgebroidModel model, ConstraintSpec spec)
    : model_(std::move(model)), spec_(std::move(spec)) {
  d_basis_ = adapted_d_basis(spec_, model_.rank_e());
  annihilator_ = annihilator_matrix(spec_, model_.rank_e());
  if (model_.dim_q() == 0) constant_geometry_ = compute_geometry(Vec(0));
}

Geometry ConstrainedSystem::geometry(const Vec& q) const {
  if (constant_geometry_) {
    if (q.size() != 0) fail(ErrorKind::DimensionMismatch, "Lie algebra models take an empty chart point");
    return *constant_geometry_;
  }
  return compute_geometry(q);
}

Geometry ConstrainedSystem::compute_geometry(const Vec& q) const {
  Geometry g;
  g.q = q;
  g.splitting = build_splitting(model_, spec_, q);
  g.structure_d = project_bracket(model_, g.splitting, q);
  const RestrictedMetric rm = restrict_metric(model_, g.splitting, q);
  g.metric_d = rm.metric;
  g.metric_d_inv = rm.inverse;
  g.anchor_d = d_basis_.transpose() * model_.anchor(q);
  g.christoffel = solve_koszul(g.structure_d, g.anchor_d, g.metric_d, g.metric_d_inv,
                               metric_d_partials(q));
  if (model_.dim_q() == 0)
    g.grad_potential = Vec::Zero(rank_d());
  else
    g.grad_potential = g.metric_d_inv * (g.anchor_d * model_.potential_gradient(q));
  return g;
}

std::vector<Mat> ConstrainedSystem::metric_d_partials(const Vec& q) const {
  std::vector<Mat> out;
  for (const Mat& dg : model_.metric_partials(q)) out.push_back(d_basis_.transpose() * dg * d_basis_);
  return out;
}

std::vector<Mat> ConstrainedSystem::anchor_d_partials(const Vec& q) const {
  std::vector<Mat> out;
  for (const Mat& drho : model_.anchor_partials(q)) out.push_back(d_basis_.transpose() * drho);
  return out;
}

Mat ConstrainedSystem::bias_jacobian_q(const Vec& q, const Vec& y) const {
  if (dim_q() == 0) return Mat(rank_d(), 0);
  const double h =
      model_.has_analytic_metric_partials() ? numdiff::kFirstStep : numdiff::kSecondStep;
  return numdiff::jacobian([&](const Vec& qq) { return compute_geometry(qq).bias(y); }, q,
                           rank_d(), h);
}

ChristoffelField christoffel(const ConstrainedSystem& system, const Vec& q) {
  return system.geometry(q).christoffel;
}

Vec grad_potential(const ConstrainedSystem& system, const Vec& q) {
  return system.geometry(q).grad_potential;
}

double koszul_residual(const ConstrainedSystem& system, const Vec& q, const Vec& y, const Vec& z,
                       const Vec& w) {
  const Geometry geo = system.geometry(q);
  const std::vector<Mat> dir =
      directional_metric_derivatives(geo.anchor_d, system.metric_d_partials(q));
  const Mat& g = geo.metric_d;
  const Tensor3& c = geo.structure_d;
  const Vec nabla_y_z = geo.christoffel.gamma.contract(y, z);
  const double lhs = 2.0 * nabla_y_z.dot(g * w);
  const double rhs = derivative_along(dir, y, z, w) + derivative_along(dir, z, y, w) -
                     derivative_along(dir, w, y, z) + y.dot(g * c.contract(w, z)) +
                     z.dot(g * c.contract(w, y)) - w.dot(g * c.contract(z, y));
  return std::abs(lhs - rhs);
}

double metricity_residual(const ConstrainedSystem& system, const Vec& q, const Vec& y,
                          const Vec& z, const Vec& w) {
  const Geometry geo = system.geometry(q);
  const std::vector<Mat> dir =
      directional_metric_derivatives(geo.anchor_d, system.metric_d_partials(q));
  const Mat& g = geo.metric_d;
  const double lhs = derivative_along(dir, y, z, w);
  const double rhs = geo.christoffel.gamma.contract(y, z).dot(g * w) +
                     z.dot(g * geo.christoffel.gamma.contract(y, w));
  return std::abs(lhs - rhs);
}

}  // namespace nhoc
