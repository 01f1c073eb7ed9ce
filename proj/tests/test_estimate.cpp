#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "fred/counts.hpp"
#include "fred/estimate.hpp"
#include "fred/rng.hpp"
#include "fred/simulate.hpp"
#include "json.hpp"
#include "test_util.hpp"

using fred::Mat;
using fred::Vec;

namespace {

fred::BinbarParams fitted_binbar() {
  fred::BinbarParams q;
  q.alpha1 = 0.118;
  q.alpha2 = -0.067;
  q.beta1 = 0.647;
  q.beta2 = 0.391;
  q.delta1 = 1.20;
  q.delta2 = 1.27;
  q.sigma1 = -0.075;
  q.sigma2 = 0.453;
  q.delta = 1.492;
  return q;
}

// One long simulated path, flattened to the plain series the estimators eat.
std::vector<double> scalar_path(const fred::StochasticProcess& process,
                                const Vec& y0, int steps, std::uint64_t seed) {
  const fred::PathSet set = fred::simulate(process, y0, steps, 1, seed);
  const Mat& block = set.paths[0];
  std::vector<double> out(block.rows());
  for (int t = 0; t < block.rows(); ++t) out[t] = block(t, 0);
  return out;
}

void check_within(double est, double truth, double band, const char* label) {
  INFO(label, ": estimate ", est, " truth ", truth, " band ", band);
  CHECK(std::abs(est - truth) <= band);
}

}  // namespace

TEST_CASE("least squares recovers the count autoregression") {
  const fred::NbarParams truth{0.5, 2.0};
  const std::vector<double> series =
      scalar_path(fred::nbar_process(truth), testutil::vec({2.0}), 4000, 91u);

  const fred::EstimationResult fit = fred::nbar_ols(series);
  CHECK(fit.method == "nbar-ols");
  REQUIRE(fit.names == std::vector<std::string>{"rho", "delta"});
  REQUIRE(fit.theta.size() == 2);
  REQUIRE(fit.se.size() == 2);
  CHECK(fit.se[0] > 0.0);
  CHECK(fit.se[1] > 0.0);
  check_within(fit.theta[0], truth.rho, 4.0 * fit.se[0], "rho");
  check_within(fit.theta[1], truth.delta, 4.0 * fit.se[1], "delta");

  // The reported point is the (slope, intercept/slope) reparameterization of
  // the fitted regression line.
  const double slope = fit.diagnostics.at("slope");
  const double intercept = fit.diagnostics.at("intercept");
  CHECK(fit.theta[0] == slope);
  CHECK(fit.theta[1] == doctest::Approx(intercept / slope).epsilon(1e-12));
  CHECK(fit.diagnostics.at("n_transitions") == 4000.0);
  CHECK((fit.cov - fit.cov.transpose()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("least squares rejects unusable series") {
  CHECK_THROWS_AS(fred::nbar_ols({1, 2, 1, 2, 1, 2, 1, 2, 1}),
                  std::invalid_argument);

  std::vector<double> fractional(12, 1.0);
  fractional[3] = 2.5;
  CHECK_THROWS_WITH_AS(fred::nbar_ols(fractional),
                       doctest::Contains("observation 3"),
                       std::invalid_argument);

  std::vector<double> negative(12, 1.0);
  negative[5] = -2.0;
  CHECK_THROWS_AS(fred::nbar_ols(negative), std::invalid_argument);

  // A perfectly alternating series regresses with slope -1: integer-valued,
  // but not the mean-reverting dynamics the reparameterization needs.
  std::vector<double> alternating;
  for (int t = 0; t < 20; ++t) alternating.push_back(t % 2 == 0 ? 5.0 : 0.0);
  CHECK_THROWS_WITH_AS(fred::nbar_ols(alternating),
                       doctest::Contains("outside (0,1)"), std::runtime_error);
}

TEST_CASE("likelihood fit agrees with the simulated truth") {
  const fred::NbarParams truth{0.5, 2.0};
  const std::vector<double> series =
      scalar_path(fred::nbar_process(truth), testutil::vec({2.0}), 4000, 91u);

  const fred::EstimationResult fit = fred::nbar_mle(series);
  CHECK(fit.method == "nbar-mle");
  REQUIRE(fit.names == std::vector<std::string>{"rho", "delta"});
  check_within(fit.theta[0], truth.rho, 4.0 * fit.se[0], "rho");
  check_within(fit.theta[1], truth.delta, 4.0 * fit.se[1], "delta");
  CHECK(fit.diagnostics.at("converged") == 1.0);
  CHECK(fit.diagnostics.at("grad_norm") < 1e-3);
  CHECK(fit.diagnostics.at("n_transitions") == 4000.0);

  // The reported log likelihood is the transition log pmf summed along the
  // path at the fitted point.
  const fred::NbarParams at{fit.theta[0], fit.theta[1]};
  double loglik = 0.0;
  for (std::size_t t = 1; t < series.size(); ++t)
    loglik += fred::nbar_transition_logpmf(at, static_cast<int>(series[t]),
                                           static_cast<int>(series[t - 1]));
  CHECK(fit.diagnostics.at("loglik") ==
        doctest::Approx(loglik).epsilon(1e-10));

  // The optimum should not depend on where the simplex starts.
  const fred::EstimationResult refit =
      fred::nbar_mle(series, fred::NbarParams{0.3, 1.2});
  CHECK(refit.theta[0] == doctest::Approx(fit.theta[0]).epsilon(1e-5));
  CHECK(refit.theta[1] == doctest::Approx(fit.theta[1]).epsilon(1e-5));

  CHECK_THROWS_AS(fred::nbar_mle(series, fred::NbarParams{1.2, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fred::nbar_mle(series, fred::NbarParams{0.5, -1.0}),
                  std::invalid_argument);

  // The default start comes from the regression, so its failure propagates.
  std::vector<double> alternating;
  for (int t = 0; t < 20; ++t) alternating.push_back(t % 2 == 0 ? 5.0 : 0.0);
  CHECK_THROWS_AS(fred::nbar_mle(alternating), std::runtime_error);
}

TEST_CASE("estimation results serialize with named parameters") {
  const fred::NbarParams truth{0.5, 2.0};
  const std::vector<double> series =
      scalar_path(fred::nbar_process(truth), testutil::vec({2.0}), 500, 17u);
  const fred::EstimationResult fit = fred::nbar_ols(series);

  const nlohmann::json j = nlohmann::json::parse(fit.to_json());
  CHECK(j.at("method") == "nbar-ols");
  CHECK(j.at("theta").at("rho").get<double>() == fit.theta[0]);
  CHECK(j.at("se").at("delta").get<double>() == fit.se[1]);
  REQUIRE(j.at("cov").size() == 4);
  CHECK(j.at("cov")[1].get<double>() == fit.cov(0, 1));
  CHECK(j.at("diagnostics").contains("n_transitions"));
}

TEST_CASE("delta bands are exact for linear quantities") {
  Mat cov(2, 2);
  cov << 0.09, 0.02,
         0.02, 0.16;
  const Vec theta = testutil::vec({1.5, -0.5});
  Mat b(2, 2);
  b << 1.0, 2.0,
       3.0, 4.0;
  const fred::VectorFn linear = [&b](const Vec& x) -> Vec {
    return b * x + testutil::vec({0.25, -1.0});
  };

  const fred::DeltaBand band = fred::delta_band(linear, theta, cov, 0.95);
  const Mat omega = b * cov * b.transpose();
  for (int i = 0; i < 2; ++i) {
    CHECK(band.value[i] ==
          doctest::Approx((b * theta)[i] + (i == 0 ? 0.25 : -1.0)));
    CHECK(band.std_error[i] ==
          doctest::Approx(std::sqrt(omega(i, i))).epsilon(1e-8));
    CHECK(band.upper[i] > band.value[i]);
    CHECK(band.lower[i] < band.value[i]);
  }

  // With unit variance the half width at 95% is the usual normal quantile.
  const fred::VectorFn identity = [](const Vec& x) -> Vec { return x; };
  const fred::DeltaBand unit = fred::delta_band(
      identity, testutil::vec({2.0}), Mat::Identity(1, 1), 0.95);
  CHECK(unit.upper[0] - unit.value[0] ==
        doctest::Approx(1.9599639845400545).epsilon(1e-7));

  const fred::DeltaBand wide = fred::delta_band(
      identity, testutil::vec({2.0}), Mat::Identity(1, 1), 0.99);
  CHECK(wide.upper[0] > unit.upper[0]);

  // Zero parameter uncertainty collapses the band onto the point value.
  const fred::DeltaBand point =
      fred::delta_band(linear, theta, Mat::Zero(2, 2), 0.9);
  for (int i = 0; i < 2; ++i) {
    CHECK(point.std_error[i] == 0.0);
    CHECK(point.lower[i] == point.value[i]);
    CHECK(point.upper[i] == point.value[i]);
  }

  CHECK_THROWS_AS(fred::delta_band(identity, theta, cov, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(fred::delta_band(identity, theta, cov, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(fred::delta_band(identity, theta, Mat::Zero(3, 3), 0.9),
                  std::invalid_argument);
}

TEST_CASE("compound persistence sensitivity matches finite differences") {
  const fred::ArgParams params{0.6, 1.1};
  const auto compound = [](double beta, double u, int m) {
    double value = u;
    for (int j = 0; j < m; ++j) value = beta * value / (1.0 + value);
    return value;
  };

  for (const double u : {0.3, 1.7}) {
    for (int m = 1; m <= 9; ++m) {
      const double step = 1e-6;
      const double fd = (compound(params.beta + step, u, m) -
                         compound(params.beta - step, u, m)) /
                        (2.0 * step);
      const double exact = fred::arg_compound_beta_sensitivity(params, u, m);
      INFO("u ", u, " m ", m);
      CHECK(exact == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK(fred::arg_compound_beta_sensitivity(params, u, 0) == 0.0);
  }

  // One step is beta u / (1 + u), linear in beta.
  CHECK(fred::arg_compound_beta_sensitivity(params, 0.5, 1) ==
        doctest::Approx(0.5 / 1.5).epsilon(1e-14));
  CHECK_THROWS_AS(fred::arg_compound_beta_sensitivity(params, 0.5, -1),
                  std::invalid_argument);
}

TEST_CASE("default moment grid covers the argument combinations") {
  const std::vector<fred::GmmQuadruplet> quads =
      fred::default_binbar_quadruplets();
  REQUIRE(quads.size() == 9);
  for (const fred::GmmQuadruplet& q : quads)
    for (const double v : {q.u1, q.u2, q.v1, q.v2})
      CHECK((v == 0.01 || v == 0.41));

  const auto has = [&quads](double u1, double u2, double v1, double v2) {
    for (const fred::GmmQuadruplet& q : quads)
      if (q.u1 == u1 && q.u2 == u2 && q.v1 == v1 && q.v2 == v2) return true;
    return false;
  };
  CHECK(has(0.01, 0.01, 0.01, 0.01));  // base point
  CHECK(has(0.41, 0.01, 0.41, 0.01));  // own argument with own instrument
  CHECK(has(0.41, 0.41, 0.01, 0.01));  // joint argument, base instrument
  CHECK(has(0.41, 0.41, 0.41, 0.41));  // far corner

  for (std::size_t i = 0; i < quads.size(); ++i)
    for (std::size_t j = i + 1; j < quads.size(); ++j)
      CHECK_FALSE((quads[i].u1 == quads[j].u1 && quads[i].u2 == quads[j].u2 &&
                   quads[i].v1 == quads[j].v1 && quads[i].v2 == quads[j].v2));
}

TEST_CASE("equation least squares recovers the bivariate mean dynamics") {
  const fred::BinbarParams truth = fitted_binbar();
  const fred::BinbarVarRep rep = fred::binbar_var_representation(truth);
  const fred::PathSet set =
      fred::simulate(fred::binbar_process(truth), testutil::vec({2.0, 1.0}),
                     3000, 1, 2024u);

  const fred::EstimationResult fit = fred::binbar_ols(set.paths[0]);
  CHECK(fit.method == "binbar-ols");
  REQUIRE(fit.names == std::vector<std::string>{"c1", "a11", "a12", "c2",
                                                "a21", "a22"});
  const double expected[6] = {rep.c[0], rep.a(0, 0), rep.a(0, 1),
                              rep.c[1], rep.a(1, 0), rep.a(1, 1)};
  for (int i = 0; i < 6; ++i) {
    REQUIRE(fit.se[i] > 0.0);
    check_within(fit.theta[i], expected[i], 4.5 * fit.se[i],
                 fit.names[i].c_str());
  }

  // The eigenvalue diagnostics describe the fitted mean matrix.
  Mat a_hat(2, 2);
  a_hat << fit.theta[1], fit.theta[2],
           fit.theta[4], fit.theta[5];
  const Eigen::VectorXcd eig = a_hat.eigenvalues();
  CHECK(fit.diagnostics.at("eig_modulus_1") ==
        doctest::Approx(std::abs(eig[0])).epsilon(1e-12));
  CHECK(fit.diagnostics.at("eig_modulus_2") ==
        doctest::Approx(std::abs(eig[1])).epsilon(1e-12));
  CHECK(fit.diagnostics.at("n_transitions") == 3000.0);

  // Equation-by-equation fitting leaves the cross-equation covariance empty.
  CHECK(fit.cov(0, 3) == 0.0);
  CHECK(fit.cov(2, 5) == 0.0);

  CHECK_THROWS_AS(fred::binbar_ols(Mat::Zero(8, 2)), std::invalid_argument);
  CHECK_THROWS_AS(fred::binbar_ols(Mat::Zero(50, 3)), std::invalid_argument);
}

TEST_CASE("two-step moment matching tightens the identity-weighted fit") {
  const fred::BinbarParams truth = fitted_binbar();
  const fred::PathSet set =
      fred::simulate(fred::binbar_process(truth), testutil::vec({2.0, 1.0}),
                     900, 1, 7u);

  const fred::EstimationResult fit = fred::binbar_gmm(set.paths[0], truth);
  CHECK(fit.method == "binbar-gmm");
  REQUIRE(fit.names ==
          std::vector<std::string>{"alpha1", "alpha2", "beta1", "beta2",
                                   "delta1", "delta2", "sigma1", "sigma2",
                                   "delta"});
  REQUIRE(fit.theta.size() == 9);
  for (int i = 0; i < 9; ++i) {
    CHECK(std::isfinite(fit.theta[i]));
    CHECK(std::isfinite(fit.se[i]));
    CHECK(fit.se[i] >= 0.0);
  }

  // Both objectives are reported in the step-two metric, and step two starts
  // from the step-one point, so it can only improve.
  const double step1 = fit.diagnostics.at("objective_step1_w2");
  const double step2 = fit.diagnostics.at("objective_step2_w2");
  CHECK(step2 <= step1 + 1e-12);
  CHECK(fit.diagnostics.at("j_stat") >= 0.0);
  CHECK(fit.diagnostics.at("n_transitions") == 900.0);
  CHECK(fit.diagnostics.at("jacobian_rank_deficit") == 0.0);
  CHECK(fit.diagnostics.at("jacobian_min_singular") > 0.0);

  // The persistent own loading is the best identified coordinate; even this
  // short sample should place it near the simulation truth.
  check_within(fit.theta[2], truth.beta1, 6.0 * fit.se[2], "beta1");

  CHECK_THROWS_AS(fred::binbar_gmm(Mat::Zero(10, 2), truth),
                  std::invalid_argument);
  CHECK_THROWS_AS(fred::binbar_gmm(Mat::Zero(50, 3), truth),
                  std::invalid_argument);
  CHECK_THROWS_AS(fred::binbar_gmm(set.paths[0], truth, {}),
                  std::invalid_argument);
  fred::BinbarParams bad = truth;
  bad.delta1 = -1.0;
  CHECK_THROWS_AS(fred::binbar_gmm(set.paths[0], bad), std::invalid_argument);
}

TEST_CASE("kernel decomposition matches the independent-data limits") {
  // With independent draws nothing propagates: every update term is flat
  // except the last one, which carries the whole one-period surprise.
  fred::RngStream rng(404u, 0u);
  std::vector<double> series(2500);
  for (double& v : series) v = rng.exponential();

  const double u = 0.6, y = 0.8;
  const int h = 3;
  const double log_psi = -std::log1p(u);  // unit exponential transform

  const fred::NwFeldResult result = fred::nw_feld(series, u, y, h);
  CHECK(result.h == h);
  CHECK(result.u == u);
  CHECK(result.y == y);
  REQUIRE(static_cast<int>(result.terms.size()) == h);

  double mean = 0.0, var = 0.0;
  for (const double v : series) mean += v;
  mean /= static_cast<double>(series.size());
  for (const double v : series) var += (v - mean) * (v - mean);
  var /= static_cast<double>(series.size() - 1);
  const double rot =
      1.06 * std::sqrt(var) * std::pow(series.size(), -0.2);
  CHECK(result.bandwidth == doctest::Approx(rot).epsilon(1e-12));

  for (int k = 0; k + 1 < h; ++k) {
    INFO("term ", k);
    CHECK(std::abs(result.terms[k]) < 0.1);
  }
  CHECK(result.terms[h - 1] ==
        doctest::Approx(log_psi + u * 1.0).epsilon(0.25));
  CHECK(result.total == doctest::Approx(log_psi + u * 1.0).epsilon(0.25));

  double term_sum = 0.0;
  for (const double term : result.terms) term_sum += term;
  CHECK(term_sum == doctest::Approx(result.total).epsilon(0.3));

  fred::KernelSpec fixed;
  fixed.bandwidth = 0.7;
  CHECK(fred::nw_feld(series, u, y, h, fixed).bandwidth == 0.7);
}

TEST_CASE("kernel decomposition is invariant to shifting the data") {
  fred::RngStream rng(11u, 3u);
  std::vector<double> series(400), shifted(400);
  for (std::size_t t = 0; t < series.size(); ++t) {
    series[t] = rng.exponential();
    shifted[t] = series[t] + 100.0;
  }

  fred::KernelSpec spec;
  spec.bandwidth = 0.5;
  const double u = 0.4;
  const fred::NwFeldResult base = fred::nw_feld(series, u, 1.1, 2, spec);
  const fred::NwFeldResult moved = fred::nw_feld(shifted, u, 101.1, 2, spec);

  // Shifting multiplies every fitted transform by the same constant, which
  // cancels in the log ratios; the level shift in the total cancels against
  // the shifted conditional mean.
  for (int k = 0; k < 2; ++k)
    CHECK(moved.terms[k] == doctest::Approx(base.terms[k]).epsilon(1e-7));
  CHECK(moved.total == doctest::Approx(base.total).epsilon(1e-7));
}

TEST_CASE("kernel decomposition rejects degenerate inputs") {
  fred::RngStream rng(5u, 0u);
  std::vector<double> series(60);
  for (double& v : series) v = rng.exponential();

  CHECK_THROWS_AS(fred::nw_feld(series, 0.5, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(
      fred::nw_feld(std::vector<double>(10, 1.0), 0.5, 1.0, 3),
      std::invalid_argument);

  // A constant series has no spread to set the bandwidth from.
  CHECK_THROWS_AS(fred::nw_feld(std::vector<double>(60, 2.0), 0.5, 2.0, 2),
                  std::runtime_error);

  // Far outside the sample every kernel weight underflows.
  CHECK_THROWS_AS(fred::nw_feld(series, 0.5, 1e6, 2), std::runtime_error);
}
