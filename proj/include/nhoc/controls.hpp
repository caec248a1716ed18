#pragma once

#include <vector>

#include "nhoc/types.hpp"

namespace nhoc {

/// Input sections Y_a written over the adapted basis of D: column a of
/// input_matrix holds the components of Y_a. The underactuated equations
/// need inputs aligned with basis vectors; `actuated` then lists those
/// basis indices in the order of the control vector.
class ControlDistribution {
 public:
  /// Y_A = e_A for every A.
  static ControlDistribution full(int rank_d);
  /// Arbitrary full-column-rank coefficients (rank_d x k). Only the identity
  /// counts as basis-aligned.
  static ControlDistribution from_matrix(Mat input_matrix);
  /// Y_a = e_{indices[a]}; remaining basis directions are unactuated.
  static ControlDistribution basis_aligned(int rank_d, std::vector<int> indices);

  const Mat& input_matrix() const noexcept { return input_; }
  int rank_d() const noexcept { return static_cast<int>(input_.rows()); }
  int inputs() const noexcept { return static_cast<int>(input_.cols()); }
  bool fully_actuated() const noexcept { return inputs() == rank_d(); }
  bool basis_aligned() const noexcept { return aligned_; }
  const std::vector<int>& actuated_indices() const noexcept { return actuated_; }
  const std::vector<int>& unactuated_indices() const noexcept { return unactuated_; }

 private:
  ControlDistribution(Mat input, bool aligned, std::vector<int> actuated);

  Mat input_;
  bool aligned_;
  std::vector<int> actuated_;
  std::vector<int> unactuated_;
};

}  // namespace nhoc
