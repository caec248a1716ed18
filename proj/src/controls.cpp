#include "nhoc/controls.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "nhoc/error.hpp"

namespace nhoc {

ControlDistribution::ControlDistribution(Mat input, bool aligned, std::vector<int> actuated)
    : input_(std::move(input)), aligned_(aligned), actuated_(std::move(actuated)) {
  if (!aligned_) return;
  for (int i = 0; i < rank_d(); ++i)
    if (std::find(actuated_.begin(), actuated_.end(), i) == actuated_.end()) unactuated_.push_back(i);
}

ControlDistribution ControlDistribution::full(int rank_d) {
  std::vector<int> idx(static_cast<std::size_t>(rank_d));
  for (int i = 0; i < rank_d; ++i) idx[static_cast<std::size_t>(i)] = i;
  return basis_aligned(rank_d, std::move(idx));
}

ControlDistribution ControlDistribution::from_matrix(Mat input_matrix) {
  if (input_matrix.cols() < 1 || input_matrix.cols() > input_matrix.rows() || !input_matrix.allFinite())
    fail(ErrorKind::DimensionMismatch, "input matrix must be rank_d x k with 1 <= k <= rank_d");
  Eigen::FullPivLU<Mat> lu(input_matrix);
  lu.setThreshold(1e-10);
  if (lu.rank() != input_matrix.cols())
    fail(ErrorKind::RankDeficient, "input sections are linearly dependent");
  const bool square = input_matrix.rows() == input_matrix.cols();
  const bool identity = square && input_matrix.isIdentity(0.0);
  std::vector<int> actuated;
  if (identity)
    for (int i = 0; i < input_matrix.cols(); ++i) actuated.push_back(i);
  return ControlDistribution(std::move(input_matrix), identity, std::move(actuated));
}

ControlDistribution ControlDistribution::basis_aligned(int rank_d, std::vector<int> indices) {
  if (indices.empty() || static_cast<int>(indices.size()) > rank_d)
    fail(ErrorKind::DimensionMismatch, "need between 1 and rank_d actuated indices");
  Mat input = Mat::Zero(rank_d, static_cast<Eigen::Index>(indices.size()));
  std::vector<int> seen;
  for (std::size_t a = 0; a < indices.size(); ++a) {
    const int i = indices[a];
    if (i < 0 || i >= rank_d)
      fail(ErrorKind::DimensionMismatch, "actuated index " + std::to_string(i) + " out of range");
    if (std::find(seen.begin(), seen.end(), i) != seen.end())
      fail(ErrorKind::RankDeficient, "actuated index " + std::to_string(i) + " repeated");
    seen.push_back(i);
    input(i, static_cast<Eigen::Index>(a)) = 1.0;
  }
  return ControlDistribution(std::move(input), true, std::move(indices));
}

}  // namespace nhoc
