#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace nhoc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Cube of coefficients indexed (upper, lower, lower): T(c, a, b) stores
/// T^c_ab. Used for structure functions and Christoffel symbols.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n, 0.0) {}

  int dim() const noexcept { return n_; }

  double& operator()(int c, int a, int b) { return data_[index(c, a, b)]; }
  double operator()(int c, int a, int b) const { return data_[index(c, a, b)]; }

  /// out^c = T^c_ab x^a y^b
  Vec contract(const Vec& x, const Vec& y) const {
    Vec out = Vec::Zero(n_);
    for (int c = 0; c < n_; ++c)
      for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b) out[c] += (*this)(c, a, b) * x[a] * y[b];
    return out;
  }
  Vec contract(const Vec& y) const { return contract(y, y); }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t index(int c, int a, int b) const {
    return (static_cast<std::size_t>(c) * n_ + a) * n_ + b;
  }

  int n_ = 0;
  std::vector<double> data_;
};

inline double max_abs_diff(const Tensor3& x, const Tensor3& y) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.data().size(); ++i)
    m = std::max(m, std::abs(x.data()[i] - y.data()[i]));
  return m;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace nhoc
