#pragma once

#include "fred/table.hpp"
#include "fred/types.hpp"

namespace fred {

// Y_t = φ Y_{t-1} + ε_t with ε_t i.i.d. Cauchy(0, σ). Heavy tails: no second
// moments, so the variance decomposition does not exist; the density-side
// decomposition does, which is the point of carrying this model.
struct CauchyArModel {
  double phi = 0.0;
  double sigma = 1.0;
};

CauchyArModel make_cauchy_ar(double phi, double sigma);

// Y_{t+h} | Y_t is Cauchy with drift φ^h Y_t and scale σ(1-|φ|^h)/(1-|φ|).
struct CauchyLaw {
  double drift = 0.0;
  double scale = 0.0;
};
CauchyLaw cauchy_horizon_law(const CauchyArModel& model, double y0, int h);

double cauchy_scale_h(const CauchyArModel& model, int h);  // s_h, with s_0 = 0

// log of the m-step transition density at y given state x.
double cauchy_transition_logpdf(const CauchyArModel& model, double y, double x,
                                int m);

struct QuadratureSpec {
  double target_abs_error = 1e-8;
  int max_depth = 12;  // tanh-sinh refinement levels
};

// Generic update term of the density-side decomposition at evaluation point
// y: log-scale constant plus two one-dimensional integrals against the known
// Cauchy laws of Y_{t+k} and Y_{t+k+1} given Y_t, compactified with the
// substitution ε = tan(θ). Throws if the quadrature error estimate exceeds
// the target.
double cauchy_fekd_term(const CauchyArModel& model, double y, double y0, int h,
                        int k, const QuadratureSpec& quad = {});

// Direct h-step total (single integral, not a sum of the terms above).
double cauchy_fekd_total(const CauchyArModel& model, double y, double y0, int h,
                         const QuadratureSpec& quad = {});

DecompositionTable cauchy_fekd(const CauchyArModel& model, double y, double y0,
                               int max_h, const QuadratureSpec& quad = {});

}  // namespace fred
