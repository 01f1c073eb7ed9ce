#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fred/table.hpp"
#include "fred/types.hpp"

namespace fred {

// Dynamic affine (compound autoregressive) specification. The conditional
// log-Laplace transform of Y_{t+h} given Y_t = y is
//
//   log E[exp(-u'Y_{t+h}) | y] = -a∘h(u)'y + c(u) - c(a∘h(u)),
//
// where a∘h is a composed h times with itself and c is the log-Laplace
// transform of the stationary law. grad_a0 = da'/du(0) drives conditional
// means, grad_c0 = dc/du(0) the stationary mean (-grad_c0).
struct AffineModel {
  int dim = 1;
  std::string name;
  std::function<Vec(const Vec&)> a;
  std::function<double(const Vec&)> c;
  Mat grad_a0;
  Vec grad_c0;
  std::function<bool(const Vec&)> domain;  // admissible Laplace arguments

  bool in_domain(const Vec& u) const { return !domain || domain(u); }
};

// Laplace-side decomposition pieces: per-horizon totals and per-update terms
// of the state coefficient α and the intercept β, so that
// γ(k,h|u,y) = α(h,k,u)'y + β(h,k,u) and γ(h|u,y) = α(h,u)'y + β(h,u).
struct FeldComponents {
  Vec alpha_total;
  double beta_total = 0.0;
  std::vector<Vec> alpha_terms;    // k = 0..h-1
  std::vector<double> beta_terms;  // k = 0..h-1
};

// Validates normalization a(0)=0, c(0)=0, stationarity of grad_a0, and that
// grad_a0 matches a central finite difference of a at zero.
AffineModel make_affine(int dim, std::string name,
                        std::function<Vec(const Vec&)> a,
                        std::function<double(const Vec&)> c,
                        const Mat& grad_a0, const Vec& grad_c0,
                        std::function<bool(const Vec&)> domain = nullptr);

// Strong-linear / short-memory case where only the one-step intercept
// b(u) = c(u) - c(a(u)) is known in closed form: c is recovered from the
// series c(u) = Σ_{j>=0} b(a∘j(u)), and grad_c0 = (I - grad_a0')^{-1} db/du(0).
AffineModel make_affine_from_b(int dim, std::string name,
                               std::function<Vec(const Vec&)> a,
                               std::function<double(const Vec&)> b,
                               const Mat& grad_a0,
                               std::function<bool(const Vec&)> domain = nullptr);

// a applied h times; h = 0 returns u. Every intermediate argument must stay
// in the model's domain.
Vec compound_a(const AffineModel& model, const Vec& u, int h);

// -a∘h(u)'y + c(u) - c(a∘h(u)).
double conditional_log_laplace(const AffineModel& model, const Vec& u, int h,
                               const Vec& y);

// -grad_c0 + grad_a0^h (y + grad_c0); h = 0 returns y.
Vec conditional_mean(const AffineModel& model, const Vec& y, int h);

FeldComponents feld_components(const AffineModel& model, const Vec& u, int h);

// Assembles the per-(k,h) table γ(k,h|u,y) = α(h,k,u)'y + β(h,k,u) for
// h = 1..H with totals from the direct formula α(h,u)'y + β(h,u).
DecompositionTable feld_table(const AffineModel& model, const Vec& u,
                              const Vec& y, int max_h);

// Variance-decomposition term E{V[E(Y_{t+h}|I_{t+k+1})|I_{t+k}]|I_t = y0}.
// The one-step conditional variance is affine in the state with matrix
// coefficients read off the Hessians of a and b at zero (central finite
// differences, step 1e-4); the result must be symmetric PSD within 1e-8.
Mat fevd_affine_term(const AffineModel& model, const Vec& y0, int h, int k);

// Total conditional variance V(Y_{t+h}|y0) obtained directly as the Hessian
// of u -> conditional_log_laplace(u,h,y0) at u = 0; the per-k terms above sum
// to this (independent cross-check of Σ_k terms).
Mat fevd_affine_total(const AffineModel& model, const Vec& y0, int h);

// Certainty-equivalent view of the FELD for univariate models:
// pi(u,h|y) = -(1/u) log Ψ(u,h|y), premium(u,h|y) = E(Y_{t+h}|y) - pi(u,h|y)
// = γ(h|u,y)/u >= 0, with per-update premium terms γ(k,h|u,y)/u.
struct RiskPremiumDecomposition {
  std::vector<double> certainty_equivalent;     // per h = 1..H
  std::vector<double> premium;                  // per h = 1..H
  std::vector<std::vector<double>> premium_terms;  // [h-1][k]
};

RiskPremiumDecomposition risk_premium_decomposition(const AffineModel& model,
                                                    double u, double y0,
                                                    int max_h);

}  // namespace fred
