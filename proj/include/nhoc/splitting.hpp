#pragma once

#include <optional>

#include "nhoc/model.hpp"
#include "nhoc/types.hpp"

namespace nhoc {

/// Linear constraint subbundle D of E, given by spanning vectors, by
/// annihilating covectors, or both. When a span is present its column order
/// is the adapted basis of D; otherwise a canonical basis of ker(annihilator)
/// is derived (reduced echelon form, leading entries +1).
struct ConstraintSpec {
  std::optional<Mat> span;         ///< rank_e x rank_d, columns span D
  std::optional<Mat> annihilator;  ///< (rank_e - rank_d) x rank_e, rows annihilate D

  static ConstraintSpec from_span(Mat basis);
  static ConstraintSpec from_annihilator(Mat covectors);
  /// Both forms at once; the span must lie in the kernel of the covectors.
  static ConstraintSpec from_span_and_annihilator(Mat basis, Mat covectors);
  /// D = E.
  static ConstraintSpec full(int rank_e);
};

/// Tolerance for the independence test on constraint vectors/covectors.
inline constexpr double kRankTolerance = 1e-10;

/// Throws RankDeficient/DimensionMismatch when the spec is unusable for a bundle of rank_e.
void validate_constraint(const ConstraintSpec& spec, int rank_e);

/// Adapted basis of D as columns of a rank_e x rank_d matrix (q-independent).
Mat adapted_d_basis(const ConstraintSpec& spec, int rank_e);

/// Annihilator covectors as rows; derived from the span when not given.
Mat annihilator_matrix(const ConstraintSpec& spec, int rank_e);

/// Basis of ker(a) in reduced column echelon form: every basis vector has a
/// leading +1 in a pivot row where all other basis vectors vanish.
Mat canonical_kernel(const Mat& a);

/// Orthogonal decomposition E = D (+) D^perp with respect to the bundle metric.
struct OrthogonalSplitting {
  Mat d_basis;      ///< rank_e x rank_d
  Mat dperp_basis;  ///< rank_e x (rank_e - rank_d), columns G^{-1} mu^alpha
  Mat projector_p;  ///< onto D along D^perp
  Mat projector_q;  ///< Id - P
};

OrthogonalSplitting build_splitting(const AlgebroidModel& model, const ConstraintSpec& spec,
                                    const Vec& q);

/// Structure functions of the bracket P[[i X, i Y]]_E in the adapted basis.
Tensor3 project_bracket(const AlgebroidModel& model, const OrthogonalSplitting& splitting,
                        const Vec& q);

struct RestrictedMetric {
  Mat metric;
  Mat inverse;
};

RestrictedMetric restrict_metric(const AlgebroidModel& model, const OrthogonalSplitting& splitting,
                                 const Vec& q);

}  // namespace nhoc
