#pragma once

#include <optional>
#include <vector>

#include "nhoc/model.hpp"
#include "nhoc/splitting.hpp"
#include "nhoc/types.hpp"

namespace nhoc {

/// Christoffel symbols of the Levi-Civita connection on D:
/// nabla_{e_A} e_B = gamma(C, A, B) e_C.
struct ChristoffelField {
  Tensor3 gamma;

  /// Gamma^C_AB y^A y^B
  Vec quadratic(const Vec& y) const { return gamma.contract(y); }
};

/// All geometric data of the constrained system at one chart point.
struct Geometry {
  Vec q;
  OrthogonalSplitting splitting;
  Tensor3 structure_d;  ///< projected structure functions in the adapted basis
  Mat anchor_d;         ///< rank_d x dim_q
  Mat metric_d;
  Mat metric_d_inv;
  ChristoffelField christoffel;
  Vec grad_potential;  ///< (G^D)^{CB} (rho_D)^i_B dV/dq^i

  /// Gamma(y, y) + grad V; the uncontrolled acceleration is its negative.
  Vec bias(const Vec& y) const;
  /// d bias / d y, rank_d x rank_d.
  Mat bias_jacobian_y(const Vec& y) const;
  /// 1/2 G^D(y, y); add V(q) for the total energy.
  double kinetic_energy(const Vec& y) const;
};

/// The skew-symmetric algebroid induced on D. Immutable; geometry for Lie
/// algebra models (dim_q = 0) is computed once at construction.
class ConstrainedSystem {
 public:
  ConstrainedSystem(AlgebroidModel model, ConstraintSpec spec);

  const AlgebroidModel& model() const noexcept { return model_; }
  const ConstraintSpec& constraint() const noexcept { return spec_; }
  int dim_q() const noexcept { return model_.dim_q(); }
  int rank_e() const noexcept { return model_.rank_e(); }
  int rank_d() const noexcept { return static_cast<int>(d_basis_.cols()); }
  const Mat& d_basis() const noexcept { return d_basis_; }
  const Mat& annihilator() const noexcept { return annihilator_; }

  Geometry geometry(const Vec& q) const;

  /// d(G^D)/dq^i = B^T (dG/dq^i) B for each i.
  std::vector<Mat> metric_d_partials(const Vec& q) const;
  /// d(rho_D)/dq^i, each rank_d x dim_q.
  std::vector<Mat> anchor_d_partials(const Vec& q) const;

  /// d bias / d q (rank_d x dim_q) by central differences.
  Mat bias_jacobian_q(const Vec& q, const Vec& y) const;

  double potential(const Vec& q) const { return model_.potential(q); }

 private:
  Geometry compute_geometry(const Vec& q) const;

  AlgebroidModel model_;
  ConstraintSpec spec_;
  Mat d_basis_;
  Mat annihilator_;
  std::optional<Geometry> constant_geometry_;
};

/// Solves the Koszul formula for the connection coefficients at q.
ChristoffelField christoffel(const ConstrainedSystem& system, const Vec& q);

/// Gradient of the potential with respect to G^D, in the adapted basis.
Vec grad_potential(const ConstrainedSystem& system, const Vec& q);

/// |2 G^D(nabla_y z, w) - Koszul right-hand side| for constant-coefficient
/// sections y, z, w of D.
double koszul_residual(const ConstrainedSystem& system, const Vec& q, const Vec& y, const Vec& z,
                       const Vec& w);

/// |rho_D(y)(G^D(z, w)) - G^D(nabla_y z, w) - G^D(z, nabla_y w)|.
double metricity_residual(const ConstrainedSystem& system, const Vec& q, const Vec& y,
                          const Vec& z, const Vec& w);

}  // namespace nhoc
