#pragma once

// Positive-valued processes: the autoregressive gamma process and its
// matrix-variate analogue, an autoregressive model for positive definite
// matrices driven by Gaussian shocks.

#include "fred/affine.hpp"
#include "fred/table.hpp"
#include "fred/types.hpp"

namespace fred {

// ---------------------------------------------------------------------------
// Autoregressive gamma, unit scale:
//   Z_{t+1} | Y_t ~ Poisson(beta Y_t),  Y_{t+1} | Z ~ Gamma(delta + Z).

struct ArgParams {
  double beta;   // persistence, in (0,1)
  double delta;  // shape, > 0
};

ArgParams make_arg(double beta, double delta);

// (1 - beta^m) / (1 - beta); the m-fold compound of a is
// beta^m u / (1 + v_m u).
double arg_v(const ArgParams& params, int m);

// Affine handle with a(u) = beta u / (1 + u), defined for u > -(1 - beta).
AffineModel arg_affine(const ArgParams& params);

// State coefficient of the h-step Laplace decomposition total,
//   alpha(h, u) = beta^h u [1 - 1 / (1 + v_h u)].
double arg_feld_alpha(const ArgParams& params, double u, int h);

// Intercept of the h-step Laplace decomposition total,
//   beta(h, u) = delta [v_h u - log(1 + v_h u)], nonnegative for u > 0.
double arg_feld_beta(const ArgParams& params, double u, int h);

// Argument at which the state coefficients at horizons h and h+1 coincide:
// below it the longer horizon loads more on the state, above it less.  Can
// be negative, in which case the h-coefficient dominates for every u > 0.
double arg_crossing(const ArgParams& params, int h);

// Laplace decomposition table from closed-form per-horizon terms; u >= 0.
DecompositionTable arg_feld(const ArgParams& params, double u, double y0,
                            int max_h);

// ---------------------------------------------------------------------------
// Matrix autoregression: Y_t is n x n positive semi-definite,
//   Y_{t+1} = sum_{k=1}^K x_k x_k',  x_k = M x_k^- + eps_k,  eps_k ~ N(0, Sigma)
// where the x_k^- are the factor columns of Y_t.  The Laplace transform is
// taken in a symmetric PSD matrix argument Gamma:
//   E[exp(-Tr(Gamma Y_{t+h})) | Y_t].

struct WarParams {
  Mat m;        // mean-reversion matrix, spectral radius < 1
  Mat sigma;    // shock covariance, symmetric positive definite
  double k_dof; // degrees of freedom, > 0
};

WarParams make_war(const Mat& m, const Mat& sigma, double k_dof);

// h-step shock covariance Sigma_h = Sigma + M Sigma_{h-1} M', Sigma_0 = 0.
Mat war_sigma_h(const WarParams& params, int h);

// log E[exp(-Tr(Gamma Y_{t+h})) | Y_t = y].
double war_log_laplace(const WarParams& params, const Mat& gamma, int h,
                       const Mat& y);

// E(Y_{t+h} | Y_t = y) = M^h y (M^h)' + K Sigma_h.
Mat war_mean(const WarParams& params, const Mat& y, int h);

// Coefficient on the state in the (h, k) decomposition term:
//   (M^h)' [Gamma W_{h-k-1} - Gamma W_{h-k}] M^h
// with W_m = (I + 2 Sigma_m Gamma)^{-1}, evaluated through the symmetric
// split Gamma W_m = Gamma^{1/2} (I + 2 Gamma^{1/2} Sigma_m Gamma^{1/2})^{-1}
// Gamma^{1/2} so that only well-conditioned PD solves appear.
Mat war_feld_state_coef(const WarParams& params, const Mat& gamma, int h,
                        int k);

// Value of the (h, k) decomposition term at state y.
double war_feld_term(const WarParams& params, const Mat& gamma, const Mat& y,
                     int h, int k);

// Decomposition total Tr[Gamma E(Y_{t+h}|y)] + log Laplace.
double war_feld_total(const WarParams& params, const Mat& gamma, const Mat& y,
                      int h);

// Full table; gamma and y are flattened row-major into the argument and
// state slots, with the matrix order recorded alongside.
DecompositionTable war_feld(const WarParams& params, const Mat& gamma,
                            const Mat& y, int max_h);

}  // namespace fred
