#include "fred/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fred {

NelderMeadResult nelder_mead(const ScalarFn& f, const Vec& x0,
                             double initial_step, double tol, int max_iter) {
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw std::invalid_argument("nelder_mead: empty start point");

  std::vector<Vec> simplex(n + 1, x0);
  for (int i = 0; i < n; ++i)
    simplex[i + 1][i] += initial_step * std::max(1.0, std::abs(x0[i]));
  std::vector<double> values(n + 1);
  for (int i = 0; i <= n; ++i) values[i] = f(simplex[i]);

  const auto order = [&] {
    std::vector<int> idx(n + 1);
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return values[a] < values[b]; });
    std::vector<Vec> s(n + 1);
    std::vector<double> v(n + 1);
    for (int i = 0; i <= n; ++i) {
      s[i] = simplex[idx[i]];
      v[i] = values[idx[i]];
    }
    simplex.swap(s);
    values.swap(v);
  };

  NelderMeadResult result;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    order();
    const double spread = values[n] - values[0];
    double diameter = 0.0;
    for (int i = 1; i <= n; ++i)
      diameter = std::max(diameter, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
    if (spread < tol && diameter < std::sqrt(tol)) {
      result.converged = true;
      break;
    }

    Vec centroid = Vec::Zero(n);
    for (int i = 0; i < n; ++i) centroid += simplex[i];
    centroid /= n;

    const Vec reflected = centroid + (centroid - simplex[n]);
    const double fr = f(reflected);
    if (fr < values[0]) {
      const Vec expanded = centroid + 2.0 * (centroid - simplex[n]);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[n] = expanded;
        values[n] = fe;
      } else {
        simplex[n] = reflected;
        values[n] = fr;
      }
      continue;
    }
    if (fr < values[n - 1]) {
      simplex[n] = reflected;
      values[n] = fr;
      continue;
    }
    const Vec contracted = centroid + 0.5 * (simplex[n] - centroid);
    const double fc = f(contracted);
    if (fc < values[n]) {
      simplex[n] = contracted;
      values[n] = fc;
      continue;
    }
    for (int i = 1; i <= n; ++i) {
      simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
      values[i] = f(simplex[i]);
    }
  }

  order();
  result.x = simplex[0];
  result.value = values[0];
  result.iterations = iter;
  return result;
}

Vec fd_gradient(const ScalarFn& f, const Vec& x, double rel_step) {
  const int n = static_cast<int>(x.size());
  Vec grad(n);
  for (int i = 0; i < n; ++i) {
    const double step = rel_step * std::max(1.0, std::abs(x[i]));
    Vec up = x, dn = x;
    up[i] += step;
    dn[i] -= step;
    grad[i] = (f(up) - f(dn)) / (2.0 * step);
  }
  return grad;
}

Mat fd_jacobian(const VectorFn& f, const Vec& x, double rel_step) {
  const int n = static_cast<int>(x.size());
  Mat jac;
  for (int i = 0; i < n; ++i) {
    const double step = rel_step * std::max(1.0, std::abs(x[i]));
    Vec up = x, dn = x;
    up[i] += step;
    dn[i] -= step;
    const Vec col = (f(up) - f(dn)) / (2.0 * step);
    if (jac.size() == 0) jac.resize(col.size(), n);
    jac.col(i) = col;
  }
  return jac;
}

Mat fd_hessian_at(const ScalarFn& f, const Vec& x, double rel_step) {
  const int n = static_cast<int>(x.size());
  Mat hess(n, n);
  for (int i = 0; i < n; ++i) {
    const double si = rel_step * std::max(1.0, std::abs(x[i]));
    for (int j = i; j < n; ++j) {
      const double sj = rel_step * std::max(1.0, std::abs(x[j]));
      Vec pp = x, pm = x, mp = x, mm = x;
      pp[i] += si; pp[j] += sj;
      pm[i] += si; pm[j] -= sj;
      mp[i] -= si; mp[j] += sj;
      mm[i] -= si; mm[j] -= sj;
      hess(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * si * sj);
      hess(j, i) = hess(i, j);
    }
  }
  return hess;
}

}  // namespace fred
