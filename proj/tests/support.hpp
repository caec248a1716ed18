#pragma once

// Reference computations written independently of the library pipeline.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>

#include "nhoc/models.hpp"

namespace support {

using nhoc::Mat;
using nhoc::Vec;

class Rng {
 public:
  explicit Rng(unsigned seed = 7) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  Vec vec(int n, double scale = 1.0) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(-scale, scale);
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

inline double max_abs(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }
inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Euler-Poincare-Suslov rate with the constraint omega_3 = 0:
/// I omega' = (I omega) x omega + lambda e3, omega'_3 = 0.
inline Vec suslov_rate(const Mat& inertia, const Eigen::Vector2d& y) {
  const Eigen::Vector3d omega(y[0], y[1], 0.0);
  const Eigen::Vector3d m = inertia * omega;
  const Eigen::Vector3d rhs = m.cross(omega);
  // rows 1 and 2 do not involve lambda
  Vec out(2);
  out[0] = rhs[0] / inertia(0, 0);
  out[1] = rhs[1] / inertia(1, 1);
  return out;
}

/// The se(2) bracket with [E3, E1] = -E2, [E2, E3] = E1, [E1, E2] = 0.
inline Eigen::Vector3d se2_bracket(const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
  Eigen::Vector3d out;
  out[0] = x[1] * y[2] - x[2] * y[1];
  out[1] = -(x[2] * y[0] - x[0] * y[2]);
  out[2] = 0.0;
  return out;
}

/// Null-space form of the Lagrange-d'Alembert equations on a Lie algebra:
/// B^T (G xi' - ad*_xi G xi) = 0 with xi' = B y', (ad*_xi m)_K = m . [xi, e_K].
inline Vec nullspace_rate(const std::function<Eigen::Vector3d(const Eigen::Vector3d&, const Eigen::Vector3d&)>& bracket,
                          const Mat& g, const Mat& basis, const Vec& y) {
  const Eigen::Vector3d xi = basis * y;
  const Eigen::Vector3d m = g * xi;
  Eigen::Vector3d coad;
  for (int k = 0; k < 3; ++k) coad[k] = m.dot(bracket(xi, Eigen::Vector3d::Unit(k)));
  const Mat lhs = basis.transpose() * g * basis;
  return lhs.ldlt().solve(basis.transpose() * coad);
}

/// Classical planar sleigh with the contact point on the body axis:
/// w' = -(m a / (J + m a^2)) w v,  v' = a w^2.
inline Vec sleigh_rate(double m, double j, double a, const Vec& y) {
  Vec out(2);
  out[0] = -(m * a / (j + m * a * a)) * y[0] * y[1];
  out[1] = a * y[0] * y[0];
  return out;
}

/// Coordinate Christoffel symbols Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij),
/// metric derivatives by central differences.
inline nhoc::Tensor3 classical_christoffel(const std::function<Mat(const Vec&)>& metric, const Vec& q,
                                           double h = 1e-5) {
  const int n = static_cast<int>(q.size());
  std::vector<Mat> dg(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Vec qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    dg[static_cast<std::size_t>(i)] = (metric(qp) - metric(qm)) / (2 * h);
  }
  const Mat ginv = metric(q).inverse();
  nhoc::Tensor3 gamma(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l)
          s += ginv(k, l) * (dg[static_cast<std::size_t>(i)](j, l) + dg[static_cast<std::size_t>(j)](i, l) -
                             dg[static_cast<std::size_t>(l)](i, j));
        gamma(k, i, j) = 0.5 * s;
      }
  return gamma;
}

/// Heisenberg frame on R^3: e1 = d/dx, e2 = d/dy + x d/dz, e3 = d/dz, so
/// [e1, e2] = e3. Bundle metric diag(1, 1 + x^2, 2) plus G_13 = 1/2 in this frame, potential
/// 1/2 (x^2 + y^2) + z, constraint e3-component = 0.
inline nhoc::ModelBundle heisenberg_particle(bool analytic_partials = false) {
  auto frame = [](const Vec& q) {
    Mat rho = Mat::Zero(3, 3);
    rho(0, 0) = 1.0;
    rho(1, 1) = 1.0;
    rho(1, 2) = q[0];
    rho(2, 2) = 1.0;
    return rho;
  };
  auto structure = [](const Vec&) {
    nhoc::Tensor3 c(3);
    c(2, 0, 1) = 1.0;
    c(2, 1, 0) = -1.0;
    return c;
  };
  auto metric = [](const Vec& q) {
    Mat g = Mat::Zero(3, 3);
    g(0, 0) = 1.0;
    g(1, 1) = 1.0 + q[0] * q[0];
    g(2, 2) = 2.0;
    g(0, 2) = g(2, 0) = 0.5;
    return g;
  };
  auto potential = [](const Vec& q) { return 0.5 * (q[0] * q[0] + q[1] * q[1]) + q[2]; };
  nhoc::ModelPartials partials;
  if (analytic_partials) {
    partials.anchor = [](const Vec&) {
      std::vector<Mat> d(3, Mat::Zero(3, 3));
      d[0](1, 2) = 1.0;
      return d;
    };
    partials.metric = [](const Vec& q) {
      std::vector<Mat> d(3, Mat::Zero(3, 3));
      d[0](1, 1) = 2.0 * q[0];
      return d;
    };
    partials.potential = [](const Vec& q) {
      Vec g(3);
      g << q[0], q[1], 1.0;
      return g;
    };
  }
  Mat mu(1, 3);
  mu << 0.0, 0.0, 1.0;
  return {"heisenberg",
          nhoc::AlgebroidModel(3, 3, structure, frame, metric, potential, partials),
          nhoc::ConstraintSpec::from_annihilator(mu)};
}

/// Lagrange-d'Alembert in ordinary coordinates for the Heisenberg particle:
/// kinetic metric g = F^{-T} G F^{-1} (F has the frame vectors as columns),
/// constraint covector w(q) = F^{-T} e3. Returns q'' for an admissible q'.
inline Vec heisenberg_accel(const Vec& q, const Vec& qdot) {
  auto frame_cols = [](const Vec& x) {
    Mat f = Mat::Identity(3, 3);
    f(2, 1) = x[0];
    return f;
  };
  auto gmat = [&](const Vec& x) {
    Mat g = Mat::Zero(3, 3);
    g(0, 0) = 1.0;
    g(1, 1) = 1.0 + x[0] * x[0];
    g(2, 2) = 2.0;
    g(0, 2) = g(2, 0) = 0.5;
    const Mat finv = frame_cols(x).inverse();
    return Mat(finv.transpose() * g * finv);
  };
  auto covector = [&](const Vec& x) { return Vec(frame_cols(x).inverse().transpose().col(2)); };
  const nhoc::Tensor3 gamma = classical_christoffel(gmat, q);
  const Mat g = gmat(q);
  Vec force(3);
  force << -q[0], -q[1], -1.0;
  const Vec w = covector(q);
  // d/dt w along the motion
  const double h = 1e-6;
  const Vec wdot = (covector(q + h * qdot) - covector(q - h * qdot)) / (2 * h);
  Mat kkt = Mat::Zero(4, 4);
  kkt.topLeftCorner(3, 3) = g;
  kkt.block(0, 3, 3, 1) = -w;
  kkt.block(3, 0, 1, 3) = w.transpose();
  Vec rhs(4);
  rhs.head(3) = force - g * gamma.contract(qdot);
  rhs[3] = -wdot.dot(qdot);
  return kkt.partialPivLu().solve(rhs).head(3);
}

}  // namespace support
