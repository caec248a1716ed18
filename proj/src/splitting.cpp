#include "nhoc/splitting.hpp"

#include <string>
#include <utility>

#include "nhoc/error.hpp"

namespace nhoc {

namespace {

void require_independent(const Mat& vectors, const char* what) {
  if (vectors.size() == 0) return;
  Eigen::JacobiSVD<Mat> svd(vectors);
  const Vec& s = svd.singularValues();
  const double smax = s.size() ? s[0] : 0.0;
  const double smin = s.size() ? s[s.size() - 1] : 0.0;
  if (!vectors.allFinite() || smin <= kRankTolerance * std::max(1.0, smax))
    fail(ErrorKind::RankDeficient, std::string(what) + " are linearly dependent (smallest singular value " +
                                       std::to_string(smin) + ")");
}

Mat left_inverse_into_d(const Mat& basis, const Mat& metric_d_inv, const Mat& metric) {
  return metric_d_inv * basis.transpose() * metric;
}

void orient_columns(Mat& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (std::abs(m(i, j)) > kRankTolerance) {
        if (m(i, j) < 0.0) m.col(j) = -m.col(j);
        break;
      }
    }
  }
}

}  // namespace

ConstraintSpec ConstraintSpec::from_span(Mat basis) {
  ConstraintSpec spec;
  spec.span = std::move(basis);
  return spec;
}

ConstraintSpec ConstraintSpec::from_annihilator(Mat covectors) {
  ConstraintSpec spec;
  spec.annihilator = std::move(covectors);
  return spec;
}

ConstraintSpec ConstraintSpec::from_span_and_annihilator(Mat basis, Mat covectors) {
  ConstraintSpec spec;
  spec.span = std::move(basis);
  spec.annihilator = std::move(covectors);
  return spec;
}

ConstraintSpec ConstraintSpec::full(int rank_e) { return from_span(Mat::Identity(rank_e, rank_e)); }

void validate_constraint(const ConstraintSpec& spec, int rank_e) {
  if (!spec.span && !spec.annihilator)
    fail(ErrorKind::InvalidArgument, "constraint needs a span or an annihilator");
  if (spec.span) {
    const Mat& b = *spec.span;
    if (b.rows() != rank_e || b.cols() < 1 || b.cols() > rank_e)
      fail(ErrorKind::DimensionMismatch, "span basis must be " + std::to_string(rank_e) +
                                             " x k with 1 <= k <= rank_e");
    require_independent(b, "span vectors");
  }
  if (spec.annihilator) {
    const Mat& mu = *spec.annihilator;
    if (mu.cols() != rank_e || mu.rows() >= rank_e)
      fail(ErrorKind::DimensionMismatch, "annihilator must be r x " + std::to_string(rank_e) +
                                             " with r < rank_e");
    require_independent(mu, "annihilator covectors");
  }
  if (spec.span && spec.annihilator) {
    const Mat& b = *spec.span;
    const Mat& mu = *spec.annihilator;
    if (b.cols() + mu.rows() != rank_e)
      fail(ErrorKind::DimensionMismatch, "span and annihilator ranks do not add up to rank_e");
    if (mu.rows() > 0 && (mu * b).cwiseAbs().maxCoeff() > kRankTolerance)
      fail(ErrorKind::ValidationError, "span vectors are not annihilated by the covectors");
  }
}

Mat canonical_kernel(const Mat& a) {
  const Eigen::Index n = a.cols();
  if (a.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double smax = s.size() ? s[0] : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > kRankTolerance * std::max(1.0, smax)) ++rank;
  const Eigen::Index k = n - rank;
  // Rows of `r` are kernel vectors; reduce them to row echelon form.
  Mat r = svd.matrixV().rightCols(k).transpose();
  Eigen::Index row = 0;
  for (Eigen::Index col = 0; col < n && row < k; ++col) {
    Eigen::Index pivot = row;
    r.col(col).segment(row, k - row).cwiseAbs().maxCoeff(&pivot);
    pivot += row;
    if (std::abs(r(pivot, col)) <= kRankTolerance) continue;
    r.row(row).swap(r.row(pivot));
    r.row(row) /= r(row, col);
    for (Eigen::Index other = 0; other < k; ++other)
      if (other != row) r.row(other) -= r(other, col) * r.row(row);
    r(row, col) = 1.0;
    ++row;
  }
  return r.transpose();
}

Mat adapted_d_basis(const ConstraintSpec& spec, int rank_e) {
  validate_constraint(spec, rank_e);
  if (spec.span) return *spec.span;
  return canonical_kernel(*spec.annihilator);
}

Mat annihilator_matrix(const ConstraintSpec& spec, int rank_e) {
  validate_constraint(spec, rank_e);
  if (spec.annihilator) return *spec.annihilator;
  return canonical_kernel(spec.span->transpose()).transpose();
}

OrthogonalSplitting build_splitting(const AlgebroidModel& model, const ConstraintSpec& spec,
                                    const Vec& q) {
  const int n = model.rank_e();
  OrthogonalSplitting out;
  out.d_basis = adapted_d_basis(spec, n);
  const Mat mu = annihilator_matrix(spec, n);
  const Mat g = model.metric(q);
  if (!is_symmetric_positive_definite(g))
    fail(ErrorKind::SingularMetric, "bundle metric is not symmetric positive-definite");
  const RestrictedMetric gd = [&] {
    OrthogonalSplitting partial;
    partial.d_basis = out.d_basis;
    return restrict_metric(model, partial, q);
  }();
  out.projector_p = out.d_basis * left_inverse_into_d(out.d_basis, gd.inverse, g);
  out.projector_q = Mat::Identity(n, n) - out.projector_p;
  out.dperp_basis = g.llt().solve(mu.transpose());
  orient_columns(out.dperp_basis);
  return out;
}

RestrictedMetric restrict_metric(const AlgebroidModel& model, const OrthogonalSplitting& splitting,
                                 const Vec& q) {
  const Mat& b = splitting.d_basis;
  const Mat g = model.metric(q);
  Mat gd = b.transpose() * g * b;
  gd = 0.5 * (gd + gd.transpose());
  Eigen::LLT<Mat> llt(gd);
  if (!gd.allFinite() || llt.info() != Eigen::Success)
    fail(ErrorKind::SingularMetric, "restricted metric is not positive-definite");
  RestrictedMetric out{gd, llt.solve(Mat::Identity(gd.rows(), gd.cols()))};
  out.inverse = 0.5 * (out.inverse + out.inverse.transpose());
  const double residual = (gd * out.inverse - Mat::Identity(gd.rows(), gd.cols())).cwiseAbs().maxCoeff();
  const double cond = gd.cwiseAbs().rowwise().sum().maxCoeff() *
                      out.inverse.cwiseAbs().rowwise().sum().maxCoeff();
  if (residual > 1e-12 * std::max(1.0, cond))
    fail(ErrorKind::SingularMetric, "restricted metric inverse residual " + std::to_string(residual));
  return out;
}

Tensor3 project_bracket(const AlgebroidModel& model, const OrthogonalSplitting& splitting,
                        const Vec& q) {
  const Mat& b = splitting.d_basis;
  const int rank_d = static_cast<int>(b.cols());
  const RestrictedMetric gd = restrict_metric(model, splitting, q);
  const Mat into_d = left_inverse_into_d(b, gd.inverse, model.metric(q));
  const Tensor3 ce = model.structure(q);
  Tensor3 cd(rank_d);
  for (int a = 0; a < rank_d; ++a) {
    for (int bb = a + 1; bb < rank_d; ++bb) {
      const Vec coords = into_d * ce.contract(b.col(a), b.col(bb));
      for (int c = 0; c < rank_d; ++c) {
        cd(c, a, bb) = coords[c];
        cd(c, bb, a) = -coords[c];
      }
    }
  }
  return cd;
}

}  // namespace nhoc
