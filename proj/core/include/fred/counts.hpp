#pragma once

// Count-valued autoregressions: integer AR with binomial thinning (INAR),
// the negative-binomial autoregression (NBAR), and its bivariate extension
// with a shared intensity factor.

#include "fred/affine.hpp"
#include "fred/table.hpp"
#include "fred/types.hpp"

namespace fred {

// ---------------------------------------------------------------------------
// INAR(1): Y_{t+1} = Binomial(Y_t, p) + Poisson(lambda).

struct InarParams {
  double p;       // thinning probability, in [0,1)
  double lambda;  // arrival intensity, >= 0
};

InarParams make_inar(double p, double lambda);

// Affine handle with a(u) = -log(p e^{-u} + 1 - p) and closed-form c.
AffineModel inar_affine(const InarParams& params);

// log P(Y_{t+1} = y1 | Y_t = y0), convolution of thinning and arrivals.
double inar_transition_logpmf(const InarParams& params, int y1, int y0);

// Laplace decomposition table from closed-form per-horizon terms; u >= 0.
DecompositionTable inar_feld(const InarParams& params, double u, double y0,
                             int max_h);

// Long-horizon limit of the FELD total: lambda/(1-p) (u - 1 + e^{-u}).
double inar_feld_limit(const InarParams& params, double u);

// ---------------------------------------------------------------------------
// NBAR(1): X_{t+1} | Y_t ~ Gamma(delta + Y_t), Y_{t+1} | X ~ Poisson(rho X).

struct NbarParams {
  double rho;    // persistence, in (0,1)
  double delta;  // intensity shape, > 0
};

NbarParams make_nbar(double rho, double delta);

// Partial geometric sum rho (1 - rho^m) / (1 - rho).  The index m = -1 is
// allowed and evaluates to -1, which is what the same formula gives at
// m = -1 and what the one-step Laplace ratio requires.
double nbar_beta_cum(const NbarParams& params, int m);

// Affine handle with a(u) = log(1 + rho (1 - e^{-u})) and closed-form c.
AffineModel nbar_affine(const NbarParams& params);

// log P(Y_{t+1} = y1 | Y_t = y0); negative binomial with shape delta + y0.
double nbar_transition_logpmf(const NbarParams& params, int y1, int y0);

// Laplace decomposition table from closed-form per-horizon terms; u >= 0.
DecompositionTable nbar_feld(const NbarParams& params, double u, double y0,
                             int max_h);

// ---------------------------------------------------------------------------
// Bivariate NBAR with a common factor.  Conditional on Y_t, draw independent
//   X_{j,t+1} ~ Gamma(delta_j + Y_{j,t}),  j = 1,2
//   Z_{t+1}   ~ Gamma(delta + sigma_1 Y_{1,t} + sigma_2 Y_{2,t})
// and emit Y_{j,t+1} | X, Z ~ Poisson(beta_j X_{j,t+1} + alpha_j Z_{t+1}).

struct BinbarParams {
  double alpha1, alpha2;  // loadings on the common factor
  double beta1, beta2;    // loadings on the own factors
  double delta1, delta2;  // own-factor shapes, > 0
  double sigma1, sigma2;  // feedback of the counts into the common shape
  double delta;           // common-factor shape, > 0
};

BinbarParams make_binbar(const BinbarParams& params);

// One-step exponents of E[exp(-u'Y_{t+1}) | Y_t] = exp(-a(u)'Y_t - b(u)).
void binbar_one_step(const BinbarParams& params, const Vec& u, Vec& a_out,
                     double& b_out);

// h-step exponents by iterating a^{(h)} = a(a^{(h-1)}) and accumulating
// b^{(h)} = b^{(h-1)} + b(a^{(h-1)}); same sign convention as one_step.
void binbar_recursion(const BinbarParams& params, const Vec& u, int h,
                      Vec& a_out, double& b_out);

// Conditional-mean representation E(Y_t | Y_{t-1}) = A Y_{t-1} + C.
struct BinbarVarRep {
  Mat a;
  Vec c;
};

BinbarVarRep binbar_var_representation(const BinbarParams& params);

// Left-hand margins of the three stationarity inequalities
//   1 - alpha_1 - sigma_1 beta_1 > 0
//   1 - alpha_2 - sigma_2 beta_2 > 0
//   (1 - alpha_1 - sigma_1 beta_1)(1 - alpha_2 - sigma_2 beta_2)
//       > sigma_1 sigma_2 beta_1 beta_2
// expressed so that every component must be positive.
Vec binbar_stationarity_margins(const BinbarParams& params);

// Affine handle; c(u) is accumulated from the one-step exponents.
AffineModel binbar_affine(const BinbarParams& params);

// Laplace decomposition table via the affine engine; u componentwise >= 0.
DecompositionTable binbar_feld(const BinbarParams& params, const Vec& u,
                               const Vec& y0, int max_h);

}  // namespace fred
