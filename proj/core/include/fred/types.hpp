#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace fred {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline Vec scalar_vec(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

// |a-b| measured against max(1, |a|, |b|), the tolerance convention used by
// every identity test in this project.
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace fred
