#include "fred/counts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace fred {

namespace {

// 1 - e^{-u}, accurate near zero.
double survival_arg(double u) { return -std::expm1(-u); }

void require_nonneg_arg(double u, const char* where) {
  if (!std::isfinite(u) || u < 0.0)
    throw std::invalid_argument(std::string(where) + ": needs u >= 0");
}

void require_nonneg_state(double y0, const char* where) {
  if (!std::isfinite(y0) || y0 < 0.0)
    throw std::invalid_argument(std::string(where) + ": needs state >= 0");
}

}  // namespace

// ---------------------------------------------------------------------------
// INAR

InarParams make_inar(double p, double lambda) {
  if (!(p >= 0.0 && p < 1.0))
    throw std::invalid_argument("inar: thinning probability must be in [0,1)");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("inar: arrival intensity must be >= 0");
  return InarParams{p, lambda};
}

AffineModel inar_affine(const InarParams& params) {
  const double p = params.p, lambda = params.lambda;
  auto a = [p](const Vec& u) {
    return scalar_vec(-std::log1p(-p * survival_arg(u[0])));
  };
  auto c = [p, lambda](const Vec& u) {
    return -lambda / (1.0 - p) * survival_arg(u[0]);
  };
  Mat grad_a0(1, 1);
  grad_a0 << p;
  return make_affine(1, "inar", a, c, grad_a0,
                     scalar_vec(-lambda / (1.0 - p)),
                     [](const Vec& u) { return std::isfinite(u[0]); });
}

double inar_transition_logpmf(const InarParams& params, int y1, int y0) {
  if (y0 < 0 || y1 < 0)
    throw std::invalid_argument("inar: counts must be nonnegative");
  const double p = params.p, lambda = params.lambda;
  // Survivors j of the y0 existing counts plus y1 - j arrivals.
  const int j_hi = std::min(y0, y1);
  std::vector<double> logs;
  logs.reserve(j_hi + 1);
  for (int j = 0; j <= j_hi; ++j) {
    if (p == 0.0 && j > 0) continue;
    if (lambda == 0.0 && j != y1) continue;
    double lp = std::lgamma(y0 + 1.0) - std::lgamma(j + 1.0) -
                std::lgamma(y0 - j + 1.0) - lambda - std::lgamma(y1 - j + 1.0);
    if (j > 0) lp += j * std::log(p);
    if (y0 - j > 0) lp += (y0 - j) * std::log1p(-p);
    if (y1 - j > 0) lp += (y1 - j) * std::log(lambda);
    logs.push_back(lp);
  }
  if (logs.empty())
    throw std::runtime_error("inar: transition " + std::to_string(y0) + " -> " +
                             std::to_string(y1) + " has zero probability");
  const double peak = *std::max_element(logs.begin(), logs.end());
  double acc = 0.0;
  for (const double lp : logs) acc += std::exp(lp - peak);
  return peak + std::log(acc);
}

DecompositionTable inar_feld(const InarParams& params, double u, double y0,
                             int max_h) {
  require_nonneg_arg(u, "inar_feld");
  require_nonneg_state(y0, "inar_feld");
  const double p = params.p, lambda = params.lambda;
  const double s = survival_arg(u);

  // log L_m with L_m = 1 - p^m (1 - e^{-u}), so that the m-fold compound of
  // a is -log L_m.
  const auto log_l = [&](int m) { return std::log1p(-std::pow(p, m) * s); };

  std::map<std::pair<int, int>, double> terms;
  std::map<int, double> totals;
  for (int h = 1; h <= max_h; ++h) {
    const double ph = std::pow(p, h);
    totals[h] = (ph * u + log_l(h)) * y0 +
                lambda * (1.0 - ph) / (1.0 - p) * (u + std::expm1(-u));
    for (int k = 0; k < h; ++k) {
      const double pk = std::pow(p, k);
      const double alpha = pk * log_l(h - k) - pk * p * log_l(h - k - 1);
      const double beta =
          lambda / (1.0 - p) *
              ((1.0 - pk) * log_l(h - k) - (1.0 - pk * p) * log_l(h - k - 1)) -
          lambda * s * std::pow(p, h - k - 1);
      terms[{h, k}] = alpha * y0 + beta;
    }
  }
  return assemble_table(Kind::feld, terms, totals, scalar_vec(u),
                        scalar_vec(y0));
}

double inar_feld_limit(const InarParams& params, double u) {
  if (!std::isfinite(u)) throw std::invalid_argument("inar_feld_limit: u not finite");
  return params.lambda / (1.0 - params.p) * (u + std::expm1(-u));
}

// ---------------------------------------------------------------------------
// NBAR

NbarParams make_nbar(double rho, double delta) {
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("nbar: persistence must be in (0,1)");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("nbar: shape must be > 0");
  return NbarParams{rho, delta};
}

double nbar_beta_cum(const NbarParams& params, int m) {
  if (m < -1) throw std::invalid_argument("nbar_beta_cum: m must be >= -1");
  if (m == -1) return -1.0;
  const double rho = params.rho;
  return rho * (1.0 - std::pow(rho, m)) / (1.0 - rho);
}

AffineModel nbar_affine(const NbarParams& params) {
  const double rho = params.rho, delta = params.delta;
  const double bc_inf = rho / (1.0 - rho);
  // The Laplace transform exists while 1 + bc_inf (1 - e^{-u}) stays positive;
  // the region is forward-invariant under a, so checking u itself suffices.
  auto domain = [bc_inf](const Vec& u) {
    return std::isfinite(u[0]) && 1.0 + bc_inf * survival_arg(u[0]) > 0.0;
  };
  auto a = [rho](const Vec& u) {
    return scalar_vec(std::log1p(rho * survival_arg(u[0])));
  };
  auto c = [delta, bc_inf](const Vec& u) {
    return -delta * std::log1p(bc_inf * survival_arg(u[0]));
  };
  Mat grad_a0(1, 1);
  grad_a0 << rho;
  return make_affine(1, "nbar", a, c, grad_a0,
                     scalar_vec(-delta * bc_inf), domain);
}

double nbar_transition_logpmf(const NbarParams& params, int y1, int y0) {
  if (y0 < 0 || y1 < 0)
    throw std::invalid_argument("nbar: counts must be nonnegative");
  const double rho = params.rho, shape = params.delta + y0;
  return y1 * std::log(rho) + std::lgamma(shape + y1) - std::lgamma(y1 + 1.0) -
         std::lgamma(shape) - (shape + y1) * std::log1p(rho);
}

DecompositionTable nbar_feld(const NbarParams& params, double u, double y0,
                             int max_h) {
  require_nonneg_arg(u, "nbar_feld");
  require_nonneg_state(y0, "nbar_feld");
  const double rho = params.rho, delta = params.delta;
  const double s = survival_arg(u);
  const double gc_scale = delta * rho / (1.0 - rho);

  const auto bc = [&](int m) { return nbar_beta_cum(params, m); };
  // m-fold compound of a; the m = 0 case is u itself.
  const auto compound = [&](int m) {
    if (m == 0) return u;
    return std::log1p(std::pow(rho, m) * s / (1.0 + bc(m - 1) * s));
  };

  std::map<std::pair<int, int>, double> terms;
  std::map<int, double> totals;
  for (int h = 1; h <= max_h; ++h) {
    const double rh = std::pow(rho, h);
    totals[h] = (rh * u - compound(h)) * y0 + gc_scale * u * (1.0 - rh) -
                delta * std::log1p(bc(h) * s);
    for (int k = 0; k < h; ++k) {
      const double rk = std::pow(rho, k);
      const double lo = compound(h - k - 1), hi = compound(h - k);
      const double alpha = rk * rho * lo - rk * hi;
      const double beta =
          gc_scale * ((1.0 - rk * rho) * lo - (1.0 - rk) * hi) +
          delta * (std::log1p(bc(h - k - 1) * s) - std::log1p(bc(h - k) * s));
      terms[{h, k}] = alpha * y0 + beta;
    }
  }
  return assemble_table(Kind::feld, terms, totals, scalar_vec(u),
                        scalar_vec(y0));
}

// ---------------------------------------------------------------------------
// Bivariate NBAR

BinbarParams make_binbar(const BinbarParams& params) {
  const auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(params.alpha1) || !finite(params.alpha2) ||
      !finite(params.sigma1) || !finite(params.sigma2))
    throw std::invalid_argument("binbar: parameters must be finite");
  if (!(params.beta1 >= 0.0 && params.beta2 >= 0.0))
    throw std::invalid_argument("binbar: own-factor loadings must be >= 0");
  if (!(params.delta1 > 0.0 && params.delta2 > 0.0 && params.delta > 0.0))
    throw std::invalid_argument("binbar: shape parameters must be > 0");
  return params;
}

namespace {

struct BinbarStep {
  Vec a;
  double b;  // E[exp(-u'Y_{t+1}) | Y_t] = exp(-a'Y_t - b)
};

BinbarStep binbar_step(const BinbarParams& q, const Vec& u) {
  if (u.size() != 2) throw std::invalid_argument("binbar: argument must have length 2");
  const double s1 = survival_arg(u[0]), s2 = survival_arg(u[1]);
  const double own1 = 1.0 + q.beta1 * s1;
  const double own2 = 1.0 + q.beta2 * s2;
  const double common = 1.0 + q.alpha1 * s1 + q.alpha2 * s2;
  if (!(own1 > 0.0) || !(own2 > 0.0) || !(common > 0.0))
    throw std::invalid_argument("binbar: argument outside the Laplace domain");
  BinbarStep out;
  out.a = Vec(2);
  const double log_common = std::log(common);
  out.a[0] = std::log(own1) + q.sigma1 * log_common;
  out.a[1] = std::log(own2) + q.sigma2 * log_common;
  out.b = q.delta1 * std::log(own1) + q.delta2 * std::log(own2) +
          q.delta * log_common;
  return out;
}

}  // namespace

void binbar_one_step(const BinbarParams& params, const Vec& u, Vec& a_out,
                     double& b_out) {
  const BinbarStep step = binbar_step(params, u);
  a_out = step.a;
  b_out = step.b;
}

void binbar_recursion(const BinbarParams& params, const Vec& u, int h,
                      Vec& a_out, double& b_out) {
  if (h < 0) throw std::invalid_argument("binbar_recursion: h must be >= 0");
  Vec a = u;
  double b = 0.0;
  for (int m = 0; m < h; ++m) {
    const BinbarStep step = binbar_step(params, a);
    b += step.b;
    a = step.a;
  }
  a_out = a;
  b_out = b;
}

BinbarVarRep binbar_var_representation(const BinbarParams& q) {
  BinbarVarRep rep;
  rep.a = Mat(2, 2);
  rep.a << q.alpha1 * q.sigma1 + q.beta1, q.alpha1 * q.sigma2,
           q.alpha2 * q.sigma1, q.alpha2 * q.sigma2 + q.beta2;
  rep.c = Vec(2);
  rep.c << q.alpha1 * q.delta + q.beta1 * q.delta1,
           q.alpha2 * q.delta + q.beta2 * q.delta2;
  return rep;
}

Vec binbar_stationarity_margins(const BinbarParams& q) {
  const double m1 = 1.0 - q.alpha1 - q.sigma1 * q.beta1;
  const double m2 = 1.0 - q.alpha2 - q.sigma2 * q.beta2;
  Vec out(3);
  out << m1, m2, m1 * m2 - q.sigma1 * q.sigma2 * q.beta1 * q.beta2;
  return out;
}

AffineModel binbar_affine(const BinbarParams& params) {
  auto a = [params](const Vec& u) { return binbar_step(params, u).a; };
  // The engine wants log E[exp(-u'Y_{t+1})|y] = -a(u)'y + b(u), so the
  // accumulated exponent enters with the opposite sign.
  auto b = [params](const Vec& u) { return -binbar_step(params, u).b; };
  auto domain = [params](const Vec& u) {
    if (u.size() != 2 || !u.allFinite()) return false;
    const double s1 = survival_arg(u[0]), s2 = survival_arg(u[1]);
    return 1.0 + params.beta1 * s1 > 0.0 && 1.0 + params.beta2 * s2 > 0.0 &&
           1.0 + params.alpha1 * s1 + params.alpha2 * s2 > 0.0;
  };
  return make_affine_from_b(2, "binbar", a, b,
                            binbar_var_representation(params).a, domain);
}

DecompositionTable binbar_feld(const BinbarParams& params, const Vec& u,
                               const Vec& y0, int max_h) {
  if (u.size() != 2 || y0.size() != 2)
    throw std::invalid_argument("binbar_feld: argument and state must have length 2");
  for (int i = 0; i < 2; ++i) {
    require_nonneg_arg(u[i], "binbar_feld");
    require_nonneg_state(y0[i], "binbar_feld");
  }
  return feld_table(binbar_affine(params), u, y0, max_h);
}

}  // namespace fred
