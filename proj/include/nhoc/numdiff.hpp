#pragma once

#include <functional>

#include "nhoc/types.hpp"

namespace nhoc::numdiff {

/// Central-difference step for first derivatives of model and cost fields.
inline constexpr double kFirstStep = 1e-6;
/// Step for derivatives of quantities that are themselves differenced
/// (e.g. the q-derivative of Christoffel symbols built from FD metric partials).
inline constexpr double kSecondStep = 1e-4;

inline Vec gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                    double h = kFirstStep) {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Columns are central differences of f along each coordinate of x.
inline Mat jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, Eigen::Index rows,
                    double h = kFirstStep) {
  Mat jac(rows, x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const Vec fp = f(xp);
    xp[i] = xi - h;
    const Vec fm = f(xp);
    xp[i] = xi;
    jac.col(i) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

}  // namespace nhoc::numdiff
