#include "fred/cauchy.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <stdexcept>

namespace fred {

namespace {

constexpr double kPi = 3.14159265358979323846;

// (1/π) ∫ g(d + s tanθ) dθ over (-π/2, π/2): the expectation of g under
// Cauchy(d, s). The integrand inherits logarithmic growth at ±π/2 from
// g = log(1 + ...), so the nodes have to crowd the endpoints; tanh-sinh
// does exactly that and converges where interval bisection stalls.
template <typename G>
double cauchy_expectation(double d, double s, const QuadratureSpec& quad, G&& g) {
  boost::math::quadrature::tanh_sinh<double> integrator(quad.max_depth);
  double error = 0.0, l1 = 0.0;
  const auto f = [&](double theta) { return g(d + s * std::tan(theta)); };
  const double value =
      integrator.integrate(f, -kPi / 2.0, kPi / 2.0, 1e-12, &error, &l1) / kPi;
  if (!(error <= quad.target_abs_error * kPi))
    throw std::runtime_error(
        "cauchy quadrature did not reach the target accuracy: error estimate " +
        std::to_string(error / kPi));
  return value;
}

// E[ log(1 + ((y - φ^m Y_{t+j}) / s_m)^2) | Y_t = y0 ]; j = 0 is a point mass.
double log_term_expectation(const CauchyArModel& model, double y, double y0,
                            int m, int j, const QuadratureSpec& quad) {
  const double sm = cauchy_scale_h(model, m);
  const double pm = std::pow(model.phi, m);
  const auto g = [y, sm, pm](double x) {
    const double z = (y - pm * x) / sm;
    const double az = std::abs(z);
    // Nodes land close enough to ±π/2 that z*z can overflow; switch to the
    // log form well before that.
    if (az > 1e8) return 2.0 * std::log(az) + std::log1p(1.0 / (z * z));
    return std::log1p(z * z);
  };
  if (j == 0) return g(y0);
  const CauchyLaw law = cauchy_horizon_law(model, y0, j);
  return cauchy_expectation(law.drift, law.scale, quad, g);
}

}  // namespace

CauchyArModel make_cauchy_ar(double phi, double sigma) {
  if (!(std::abs(phi) < 1.0))
    throw std::invalid_argument("cauchy: |phi| must be < 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("cauchy: sigma must be > 0");
  return CauchyArModel{phi, sigma};
}

double cauchy_scale_h(const CauchyArModel& model, int h) {
  if (h < 0) throw std::invalid_argument("cauchy_scale_h: h must be >= 0");
  const double ap = std::abs(model.phi);
  if (ap == 0.0) return h == 0 ? 0.0 : model.sigma;
  return model.sigma * (1.0 - std::pow(ap, h)) / (1.0 - ap);
}

CauchyLaw cauchy_horizon_law(const CauchyArModel& model, double y0, int h) {
  if (h < 1) throw std::invalid_argument("cauchy_horizon_law: h must be >= 1");
  return CauchyLaw{std::pow(model.phi, h) * y0, cauchy_scale_h(model, h)};
}

double cauchy_transition_logpdf(const CauchyArModel& model, double y, double x,
                                int m) {
  const CauchyLaw law = cauchy_horizon_law(model, x, m);
  const double z = (y - law.drift) / law.scale;
  return -std::log(kPi * law.scale) - std::log1p(z * z);
}

double cauchy_fekd_term(const CauchyArModel& model, double y, double y0, int h,
                        int k, const QuadratureSpec& quad) {
  if (h < 2 || k < 0 || k > h - 2)
    throw std::invalid_argument("cauchy_fekd_term: need h >= 2 and 0 <= k <= h-2");
  const double s_lo = cauchy_scale_h(model, h - k - 1);
  const double s_hi = cauchy_scale_h(model, h - k);
  return std::log(s_lo / s_hi) +
         log_term_expectation(model, y, y0, h - k - 1, k + 1, quad) -
         log_term_expectation(model, y, y0, h - k, k, quad);
}

double cauchy_fekd_total(const CauchyArModel& model, double y, double y0, int h,
                         const QuadratureSpec& quad) {
  if (h < 1) throw std::invalid_argument("cauchy_fekd_total: h must be >= 1");
  if (h == 1) return 0.0;
  // log f(y, h | Y_t) - E[ log f(y, 1 | Y_{t+h-1}) | Y_t ], each piece written
  // out so the scale constants cancel against the integral term.
  const double s_h = cauchy_scale_h(model, h);
  const double z = (y - std::pow(model.phi, h) * y0) / s_h;
  return -std::log(s_h / model.sigma) - std::log1p(z * z) +
         log_term_expectation(model, y, y0, 1, h - 1, quad);
}

DecompositionTable cauchy_fekd(const CauchyArModel& model, double y, double y0,
                               int max_h, const QuadratureSpec& quad) {
  std::map<std::pair<int, int>, double> terms;
  std::map<int, double> totals;
  for (int h = 1; h <= max_h; ++h) {
    totals[h] = cauchy_fekd_total(model, y, y0, h, quad);
    for (int k = 0; k <= h - 2; ++k)
      terms[{h, k}] = cauchy_fekd_term(model, y, y0, h, k, quad);
  }
  // Totals and terms each carry an independent quadrature error, so the
  // identity is only good to the accuracy target times the number of
  // integrals, not to the closed-form 1e-10.
  const double tol = (max_h + 1) * quad.target_abs_error;
  return assemble_table(Kind::fekd, terms, totals, scalar_vec(y), scalar_vec(y0),
                        0, std::max(tol, 1e-10));
}

}  // namespace fred
