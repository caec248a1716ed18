#include "nhoc/model.hpp"

#include <string>
#include <utility>

#include "nhoc/error.hpp"
#include "nhoc/numdiff.hpp"

namespace nhoc {

namespace {

std::string shape(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

AlgebroidModel::AlgebroidModel(int dim_q, int rank_e, StructureFn structure, MatrixFn anchor,
                               MatrixFn metric, ScalarFn potential, ModelPartials partials)
    : dim_q_(dim_q),
      rank_e_(rank_e),
      structure_(std::move(structure)),
      anchor_(std::move(anchor)),
      metric_(std::move(metric)),
      potential_(std::move(potential)),
      partials_(std::move(partials)) {
  if (dim_q_ < 0 || rank_e_ < 1)
    fail(ErrorKind::InvalidArgument, "model needs dim_q >= 0 and rank_e >= 1");
  if (!structure_ || !anchor_ || !metric_ || !potential_)
    fail(ErrorKind::InvalidArgument, "model fields must all be set");
}

AlgebroidModel AlgebroidModel::lie_algebra(Tensor3 constants, Mat metric) {
  const int n = constants.dim();
  if (metric.rows() != n || metric.cols() != n)
    fail(ErrorKind::DimensionMismatch, "metric is " + shape(metric) + ", expected " +
                                           std::to_string(n) + "x" + std::to_string(n));
  return AlgebroidModel(
      0, n, [c = std::move(constants)](const Vec&) { return c; },
      [n](const Vec&) { return Mat(n, 0); }, [g = std::move(metric)](const Vec&) { return g; },
      [](const Vec&) { return 0.0; });
}

void AlgebroidModel::check_point(const Vec& q) const {
  if (q.size() != dim_q_)
    fail(ErrorKind::DimensionMismatch, "chart point has length " + std::to_string(q.size()) +
                                           ", model dim_q is " + std::to_string(dim_q_));
}

Tensor3 AlgebroidModel::structure(const Vec& q) const {
  check_point(q);
  Tensor3 c = structure_(q);
  if (c.dim() != rank_e_)
    fail(ErrorKind::DimensionMismatch, "structure functions have rank " + std::to_string(c.dim()));
  return c;
}

Mat AlgebroidModel::anchor(const Vec& q) const {
  check_point(q);
  Mat rho = anchor_(q);
  if (rho.rows() != rank_e_ || rho.cols() != dim_q_)
    fail(ErrorKind::DimensionMismatch, "anchor is " + shape(rho));
  return rho;
}

Mat AlgebroidModel::metric(const Vec& q) const {
  check_point(q);
  Mat g = metric_(q);
  if (g.rows() != rank_e_ || g.cols() != rank_e_)
    fail(ErrorKind::DimensionMismatch, "metric is " + shape(g));
  return g;
}

double AlgebroidModel::potential(const Vec& q) const {
  check_point(q);
  return potential_(q);
}

std::vector<Mat> AlgebroidModel::fd_partials(const MatrixFn& f, const Vec& q) const {
  std::vector<Mat> out;
  out.reserve(static_cast<std::size_t>(dim_q_));
  Vec qp = q;
  for (int i = 0; i < dim_q_; ++i) {
    const double qi = q[i];
    qp[i] = qi + numdiff::kFirstStep;
    const Mat fp = f(qp);
    qp[i] = qi - numdiff::kFirstStep;
    const Mat fm = f(qp);
    qp[i] = qi;
    out.push_back((fp - fm) / (2.0 * numdiff::kFirstStep));
  }
  return out;
}

std::vector<Mat> AlgebroidModel::anchor_partials(const Vec& q) const {
  check_point(q);
  if (partials_.anchor) return partials_.anchor(q);
  return fd_partials(anchor_, q);
}

std::vector<Mat> AlgebroidModel::metric_partials(const Vec& q) const {
  check_point(q);
  if (partials_.metric) return partials_.metric(q);
  return fd_partials(metric_, q);
}

Vec AlgebroidModel::potential_gradient(const Vec& q) const {
  check_point(q);
  if (dim_q_ == 0) return Vec(0);
  if (partials_.potential) return partials_.potential(q);
  return numdiff::gradient(potential_, q);
}

bool is_symmetric_positive_definite(const Mat& m, double symmetry_tol) {
  if (m.rows() != m.cols() || !m.allFinite()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > symmetry_tol * scale) return false;
  Eigen::LLT<Mat> llt(m);
  return llt.info() == Eigen::Success;
}

}  // namespace nhoc
