#pragma once

#include <functional>
#include <vector>

#include "nhoc/types.hpp"

namespace nhoc {

/// Analytic q-derivatives a model may register. Each vector entry i holds the
/// derivative with respect to chart coordinate q^i. Missing entries fall back
/// to central differences.
struct ModelPartials {
  std::function<std::vector<Mat>(const Vec&)> anchor;
  std::function<std::vector<Mat>(const Vec&)> metric;
  std::function<Vec(const Vec&)> potential;
};

/// Local description of a Lie algebroid E -> Q with a bundle metric and a
/// potential on Q, evaluated on one chart.
///
/// Layouts: structure(q)(C, A, B) = C^C_AB; anchor(q) is rank_e x dim_q with
/// anchor(q)(A, i) = rho^i_A; metric(q) is rank_e x rank_e.
/// A Lie algebra is the case dim_q = 0: the anchor is an empty matrix and every
/// q-derivative vanishes.
class AlgebroidModel {
 public:
  using StructureFn = std::function<Tensor3(const Vec&)>;
  using MatrixFn = std::function<Mat(const Vec&)>;
  using ScalarFn = std::function<double(const Vec&)>;

  AlgebroidModel(int dim_q, int rank_e, StructureFn structure, MatrixFn anchor, MatrixFn metric,
                 ScalarFn potential, ModelPartials partials = {});

  /// Constant structure constants and metric over a single point.
  static AlgebroidModel lie_algebra(Tensor3 constants, Mat metric);

  int dim_q() const noexcept { return dim_q_; }
  int rank_e() const noexcept { return rank_e_; }

  Tensor3 structure(const Vec& q) const;
  Mat anchor(const Vec& q) const;
  Mat metric(const Vec& q) const;
  double potential(const Vec& q) const;

  std::vector<Mat> anchor_partials(const Vec& q) const;
  std::vector<Mat> metric_partials(const Vec& q) const;
  Vec potential_gradient(const Vec& q) const;

  bool has_analytic_metric_partials() const noexcept { return static_cast<bool>(partials_.metric); }

 private:
  void check_point(const Vec& q) const;
  std::vector<Mat> fd_partials(const MatrixFn& f, const Vec& q) const;

  int dim_q_;
  int rank_e_;
  StructureFn structure_;
  MatrixFn anchor_;
  MatrixFn metric_;
  ScalarFn potential_;
  ModelPartials partials_;
};

/// Checks symmetry and positive-definiteness (Cholesky) of a metric matrix.
bool is_symmetric_positive_definite(const Mat& m, double symmetry_tol = 1e-12);

}  // namespace nhoc
