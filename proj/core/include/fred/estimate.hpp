#pragma once

// Estimators for the count models plus uncertainty propagation onto the
// decompositions: least squares and likelihood for the univariate model,
// two-step moment matching for the bivariate one, delta-method bands, and a
// fully nonparametric kernel estimator of the Laplace decomposition.

#include <map>
#include <string>
#include <vector>

#include "fred/counts.hpp"
#include "fred/optim.hpp"
#include "fred/positive.hpp"
#include "fred/types.hpp"

namespace fred {

struct EstimationResult {
  std::string method;
  std::vector<std::string> names;
  Vec theta;
  Vec se;
  Mat cov;
  std::map<std::string, double> diagnostics;

  std::string to_json() const;
};

// Conditional-mean regression Y_t = rho delta + rho Y_{t-1} + error with
// heteroskedasticity-robust standard errors mapped to (rho, delta).
EstimationResult nbar_ols(const std::vector<double>& series);

// Exact transition likelihood, maximized over (logit rho, log delta); the
// covariance is the inverse observed information in the original
// parameterization.  The OLS fit seeds the search when no start is given.
EstimationResult nbar_mle(const std::vector<double>& series);
EstimationResult nbar_mle(const std::vector<double>& series,
                          const NbarParams& start);

// Equation-by-equation least squares for the conditional-mean representation
// E(Y_t|Y_{t-1}) = A Y_{t-1} + C of the bivariate model; series is T x 2.
// Reports the eigenvalue moduli of A among the diagnostics.
EstimationResult binbar_ols(const Mat& series);

// A Laplace-transform moment condition for the bivariate model: the residual
// exp(-u'Y_t) - E[exp(-u'Y_t) | Y_{t-1}] is orthogonal to exp(-v'Y_{t-1}).
struct GmmQuadruplet {
  double u1, u2, v1, v2;
};

std::vector<GmmQuadruplet> default_binbar_quadruplets();

// Two-step GMM on the quadruplet moments plus the six least-squares moment
// conditions: identity weighting first, then the inverse of the estimated
// moment covariance.  Standard errors are the usual sandwich.
EstimationResult binbar_gmm(const Mat& series, const BinbarParams& start,
                            const std::vector<GmmQuadruplet>& quadruplets =
                                default_binbar_quadruplets());
EstimationResult binbar_gmm(const Mat& series);

// Pointwise confidence bands for any smooth function of the parameters, from
// a parameter estimate and its covariance.
struct DeltaBand {
  Vec value;
  Vec std_error;
  Vec lower;
  Vec upper;
};

DeltaBand delta_band(const VectorFn& quantity, const Vec& theta,
                     const Mat& cov, double level);

// Sensitivity of the m-fold compound of the gamma-model a to its persistence
// parameter, by forward chain-rule recursion; reference point for checking
// the finite-difference Jacobians used in delta_band.
double arg_compound_beta_sensitivity(const ArgParams& params, double u, int m);

// Nonparametric Laplace decomposition at state y from one observed series.
//   1. rule-of-thumb Gaussian kernel bandwidth (unless given),
//   2. kernel regressions of exp(-u Y_{t+m}) on Y_t for each lag m,
//   3. per-date log ratios of the fitted transforms along the sample path,
//   4. kernel regression of those ratios (and of the total) back on Y_t = y.
struct KernelSpec {
  double bandwidth = 0.0;  // 0: 1.06 sd T^{-1/5}
};

struct NwFeldResult {
  int h = 0;
  double u = 0.0;
  double y = 0.0;
  double bandwidth = 0.0;
  std::vector<double> terms;  // k = 0..h-1
  double total = 0.0;
};

NwFeldResult nw_feld(const std::vector<double>& series, double u, double y,
                     int h, const KernelSpec& spec = {});

}  // namespace fred
