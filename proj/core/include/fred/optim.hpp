#pragma once

// Derivative-free minimization and finite-difference derivatives, enough to
// support likelihood and moment-based estimation without an external solver.

#include <functional>

#include "fred/types.hpp"

namespace fred {

using ScalarFn = std::function<double(const Vec&)>;
using VectorFn = std::function<Vec(const Vec&)>;

struct NelderMeadResult {
  Vec x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Downhill simplex from x0; stops when the simplex collapses in both value
// spread and edge length, or after max_iter reflections.
NelderMeadResult nelder_mead(const ScalarFn& f, const Vec& x0,
                             double initial_step = 0.1, double tol = 1e-10,
                             int max_iter = 20000);

// Central differences with per-coordinate step rel_step * max(1, |x_i|).
Vec fd_gradient(const ScalarFn& f, const Vec& x, double rel_step = 1e-5);
Mat fd_jacobian(const VectorFn& f, const Vec& x, double rel_step = 1e-5);

// Central second differences; symmetric by construction.
Mat fd_hessian_at(const ScalarFn& f, const Vec& x, double rel_step = 1e-4);

}  // namespace fred
