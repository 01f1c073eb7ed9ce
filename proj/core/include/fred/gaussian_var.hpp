#pragma once

#include <vector>

#include "fred/affine.hpp"
#include "fred/table.hpp"
#include "fred/types.hpp"

namespace fred {

// Y_t = Φ Y_{t-1} + ε_t with ε_t ~ N(0, Σ) i.i.d.
struct GaussianVarModel {
  Mat phi;
  Mat sigma;

  int dim() const { return static_cast<int>(phi.rows()); }
};

// Validates dimensions, Σ symmetric positive definite, spectral radius of Φ < 1.
GaussianVarModel make_gaussian_var(const Mat& phi, const Mat& sigma);

// Forecast error covariance Σ_h = Σ + ΦΣΦ' + ... + Φ^{h-1}Σ(Φ^{h-1})'.
Mat sigma_h(const GaussianVarModel& model, int h);

Mat mat_power(const Mat& m, int p);

// Variance decomposition: term k is Φ^{h-k-1} Σ (Φ^{h-k-1})', k = 0..h-1;
// the terms sum to Σ_h.
std::vector<Mat> var_fevd(const GaussianVarModel& model, int h);

// Density-side decomposition term evaluated at the point y, expressed as
// value(y) = a + b'y + y'C y with C independent of the conditioning state.
struct VarFekdCoefficients {
  double a = 0.0;
  Vec b;
  Mat c;

  double value(const Vec& y) const { return a + b.dot(y) + y.dot(c * y); }
};

VarFekdCoefficients var_fekd_coefficients(const GaussianVarModel& model,
                                          const Vec& y0, int h, int k);

// Direct closed form of the full h-step term (not a sum over k):
//   (1/2)log(det Σ / det Σ_h) - (1/2) d'Σ_h^{-1}d + (1/2) d'Σ^{-1}d
//   + (1/2) tr[Σ^{-1} Φ Σ_{h-1} Φ'],   d = y - Φ^h y0.
double var_fekd_total(const GaussianVarModel& model, const Vec& y,
                      const Vec& y0, int h);

// Table over h = 2..max_h (h = 1 has an empty update sum and total 0).
DecompositionTable var_fekd(const GaussianVarModel& model, const Vec& y,
                            const Vec& y0, int max_h);

// Laplace-side decomposition: term k equals b((Φ')^{h-k-1} u) with
// b(u) = u'Σu/2, independent of the state; the terms sum to u'Σ_h u / 2.
DecompositionTable var_feld(const GaussianVarModel& model, const Vec& u, int max_h);

double mahalanobis(const GaussianVarModel& model, const Vec& y, const Vec& y0,
                   int h);

// Affine view (a(u) = Φ'u linear, intercept b(u) = u'Σu/2) for comparing the
// linear-model closed forms against the generic engine.
AffineModel gaussian_var_affine(const GaussianVarModel& model);

// log N(y; Φ^h y0, Σ_h) — the h-step transition density.
double var_transition_logpdf(const GaussianVarModel& model, const Vec& y,
                             const Vec& y0, int h);

}  // namespace fred
