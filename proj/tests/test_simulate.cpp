#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "fred/affine.hpp"
#include "fred/oracle.hpp"
#include "fred/simulate.hpp"
#include "test_util.hpp"

using fred::Mat;
using fred::Vec;

namespace {

fred::GaussianVarModel small_var() {
  Mat phi(2, 2);
  phi << 0.5, 0.1,
         0.2, 0.6;
  Mat sigma(2, 2);
  sigma << 1.0, 0.2,
           0.2, 1.0;
  return fred::make_gaussian_var(phi, sigma);
}

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

// |estimate - truth| within z standard errors, with a floor so exact matches
// at tiny variance do not trip on rounding.
void check_within(const fred::OracleEstimate& est, double truth, double z) {
  const double band = std::max(z * est.std_error, 1e-12);
  INFO("estimate ", est.value, " truth ", truth, " band ", band);
  CHECK(std::abs(est.value - truth) < band);
}

}  // namespace

TEST_CASE("paths are reproducible and schedule independent") {
  const auto process = fred::inar_process(fred::make_inar(0.5, 2.0));
  const Vec y0 = testutil::vec({4.0});
  const auto a = fred::simulate(process, y0, 12, 5, 99);
  const auto b = fred::simulate(process, y0, 12, 5, 99);
  REQUIRE(a.paths.size() == 5);
  for (int i = 0; i < 5; ++i)
    CHECK((a.paths[i] - b.paths[i]).cwiseAbs().maxCoeff() == 0.0);

  // A smaller batch reproduces the leading paths exactly: path i only ever
  // touches stream (seed, i).
  const auto c = fred::simulate(process, y0, 12, 3, 99);
  for (int i = 0; i < 3; ++i)
    CHECK((a.paths[i] - c.paths[i]).cwiseAbs().maxCoeff() == 0.0);

  const auto d = fred::simulate(process, y0, 12, 3, 100);
  CHECK((a.paths[0] - d.paths[0]).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("path blocks carry the start row and the right shape") {
  const auto process = fred::gauss_var_process(small_var());
  const Vec y0 = testutil::vec({2.0, 1.0});
  const auto set = fred::simulate(process, y0, 7, 3, 11);
  CHECK(set.dim == 2);
  for (const Mat& block : set.paths) {
    CHECK(block.rows() == 8);
    CHECK(block.cols() == 2);
    CHECK(block(0, 0) == 2.0);
    CHECK(block(0, 1) == 1.0);
  }
  const std::string csv = fred::PathSet{}.to_csv();
  CHECK(csv == "path,t,component,value\n");
  const std::string full = set.to_csv();
  CHECK(full.rfind("path,t,component,value\n", 0) == 0);
  CHECK(std::count(full.begin(), full.end(), '\n') == 1 + 3 * 8 * 2);

  CHECK_THROWS_AS(fred::simulate(process, testutil::vec({1.0}), 5, 2, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(fred::simulate(process, y0, -1, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(fred::simulate(process, y0, 5, 0, 1), std::invalid_argument);
}

TEST_CASE("integer samplers emit nonnegative integer paths") {
  const auto inar = fred::simulate(fred::inar_process(fred::make_inar(0.6, 1.0)),
                                   testutil::vec({3.0}), 50, 4, 7);
  const auto binbar = fred::simulate(fred::binbar_process(fitted_binbar()),
                                     testutil::vec({2.0, 1.0}), 50, 4, 7);
  for (const auto* set : {&inar, &binbar})
    for (const Mat& block : set->paths)
      for (int t = 0; t < block.rows(); ++t)
        for (int c = 0; c < block.cols(); ++c) {
          CHECK(block(t, c) >= 0.0);
          CHECK(block(t, c) == std::round(block(t, c)));
        }

  const auto arg = fred::simulate(fred::arg_process(fred::make_arg(0.8, 1.5)),
                                  testutil::vec({1.0}), 50, 4, 7);
  for (const Mat& block : arg.paths)
    for (int t = 1; t < block.rows(); ++t) CHECK(block(t, 0) > 0.0);

  CHECK_THROWS_AS(fred::simulate(fred::inar_process(fred::make_inar(0.6, 1.0)),
                                 testutil::vec({2.5}), 3, 1, 1),
                  std::invalid_argument);
}

TEST_CASE("matrix sampler stays positive semi-definite") {
  Mat m(2, 2);
  m << 0.5, 0.15,
       -0.1, 0.4;
  Mat sigma(2, 2);
  sigma << 0.8, 0.25,
           0.25, 0.6;
  const auto process = fred::war_process(fred::make_war(m, sigma, 3.0));
  CHECK(process.dim == 4);
  const Vec y0 = testutil::vec({1.0, 0.3, 0.3, 0.8});
  const auto set = fred::simulate(process, y0, 30, 3, 21);
  for (const Mat& block : set.paths)
    for (int t = 0; t < block.rows(); ++t) {
      Mat y(2, 2);
      y << block(t, 0), block(t, 1),
           block(t, 2), block(t, 3);
      CHECK((y - y.transpose()).cwiseAbs().maxCoeff() < 1e-12);
      const Eigen::SelfAdjointEigenSolver<Mat> es(y);
      CHECK(es.eigenvalues().minCoeff() > -1e-9);
    }

  CHECK_THROWS_AS(fred::war_process(fred::make_war(m, sigma, 2.5)),
                  std::invalid_argument);
}

TEST_CASE("one-step sampler laws match the transition transforms") {
  const long n = 60000;

  SUBCASE("gaussian") {
    const auto model = small_var();
    const Vec u = testutil::vec({0.4, -0.2});
    const Vec y0 = testutil::vec({1.0, -0.5});
    const auto est = fred::mc_mean(
        fred::gauss_var_process(model), y0, 1,
        [&](const Vec& y) { return std::exp(-u.dot(y)); }, n, 314);
    const double truth = std::exp(-u.dot(model.phi * y0) +
                                  0.5 * u.dot(model.sigma * u));
    check_within(est, truth, 3.5);
  }

  SUBCASE("counts and gamma") {
    struct Case {
      fred::StochasticProcess process;
      fred::AffineModel model;
      Vec y0;
      Vec u;
    };
    std::vector<Case> cases;
    cases.push_back({fred::inar_process(fred::make_inar(0.6, 1.5)),
                     fred::inar_affine(fred::make_inar(0.6, 1.5)),
                     testutil::vec({4.0}), testutil::vec({0.7})});
    cases.push_back({fred::nbar_process(fred::make_nbar(0.5, 2.0)),
                     fred::nbar_affine(fred::make_nbar(0.5, 2.0)),
                     testutil::vec({3.0}), testutil::vec({0.9})});
    cases.push_back({fred::arg_process(fred::make_arg(0.7, 1.3)),
                     fred::arg_affine(fred::make_arg(0.7, 1.3)),
                     testutil::vec({2.0}), testutil::vec({1.1})});
    cases.push_back({fred::binbar_process(fitted_binbar()),
                     fred::binbar_affine(fitted_binbar()),
                     testutil::vec({2.0, 1.0}), testutil::vec({0.3, 0.7})});
    for (const auto& c : cases) {
      const auto est = fred::mc_mean(
          c.process, c.y0, 1,
          [&](const Vec& y) { return std::exp(-c.u.dot(y)); }, n, 2718);
      const double truth =
          std::exp(fred::conditional_log_laplace(c.model, c.u, 1, c.y0));
      check_within(est, truth, 3.5);
    }
  }

  SUBCASE("markov") {
    Mat p(3, 3);
    p << 0.6, 0.2, 0.1,
         0.3, 0.5, 0.3,
         0.1, 0.3, 0.6;
    const auto chain = fred::make_markov_chain(p);
    const Vec u = testutil::vec({0.4, -0.3, 1.2});
    const auto est = fred::mc_mean(
        fred::markov_process(chain), testutil::vec({1.0}), 1,
        [&](const Vec& y) {
          return std::exp(-u[static_cast<int>(std::lround(y[0]))]);
        },
        n, 161);
    check_within(est, std::exp(fred::mc_log_laplace(chain, u, 1, 1)), 3.5);
  }

  SUBCASE("matrix") {
    Mat m(2, 2);
    m << 0.5, 0.15,
         -0.1, 0.4;
    Mat sigma(2, 2);
    sigma << 0.8, 0.25,
             0.25, 0.6;
    const auto params = fred::make_war(m, sigma, 3.0);
    Mat gamma(2, 2);
    gamma << 0.5, 0.1,
             0.1, 0.3;
    Mat y(2, 2);
    y << 1.0, 0.3,
         0.3, 0.8;
    const auto est = fred::mc_mean(
        fred::war_process(params), testutil::vec({1.0, 0.3, 0.3, 0.8}), 1,
        [&](const Vec& v) {
          const double tr = gamma(0, 0) * v[0] + gamma(0, 1) * v[2] +
                            gamma(1, 0) * v[1] + gamma(1, 1) * v[3];
          return std::exp(-tr);
        },
        n, 424);
    check_within(est, std::exp(fred::war_log_laplace(params, gamma, 1, y)),
                 3.5);
  }

  SUBCASE("cauchy") {
    // No Laplace transform here; E[cos Y] = exp(-scale) cos(location) serves
    // as the distributional fingerprint instead.
    const auto model = fred::make_cauchy_ar(0.6, 0.9);
    const auto est = fred::mc_mean(
        fred::cauchy_process(model), testutil::vec({2.0}), 1,
        [](const Vec& y) { return std::cos(y[0]); }, n, 5151);
    check_within(est, std::exp(-0.9) * std::cos(0.6 * 2.0), 3.5);
  }
}

TEST_CASE("a zero thinning probability gives fresh draws every step") {
  const auto process = fred::inar_process(fred::make_inar(0.0, 3.7));
  const auto est = fred::mc_mean(
      process, testutil::vec({50.0}), 1, [](const Vec& y) { return y[0]; },
      60000, 8);
  check_within(est, 3.7, 3.5);
}

TEST_CASE("exact stationary samplers hit their closed-form moments") {
  const long n = 80000;
  fred::RngStream rng(4242);

  SUBCASE("counts") {
    const auto process = fred::inar_process(fred::make_inar(0.6, 1.0));
    double sum = 0.0, sumsq = 0.0;
    for (long i = 0; i < n; ++i) {
      const double y = fred::stationary_draw(process, rng)[0];
      sum += y;
      sumsq += y * y;
    }
    const double mean = sum / n, var = sumsq / n - mean * mean;
    // Poisson(lambda / (1 - p)): mean and variance both 2.5.
    CHECK(std::abs(mean - 2.5) < 3.5 * std::sqrt(2.5 / n));
    CHECK(std::abs(var - 2.5) < 0.1);
  }

  SUBCASE("gamma-poisson") {
    const auto process = fred::nbar_process(fred::make_nbar(0.5, 2.0));
    double sum = 0.0, sumsq = 0.0;
    for (long i = 0; i < n; ++i) {
      const double y = fred::stationary_draw(process, rng)[0];
      sum += y;
      sumsq += y * y;
    }
    const double mean = sum / n, var = sumsq / n - mean * mean;
    // Y = Poisson(G), G ~ Gamma(2): mean 2, variance 2 + 2 = 4.
    CHECK(std::abs(mean - 2.0) < 3.5 * std::sqrt(4.0 / n));
    CHECK(std::abs(var - 4.0) < 0.2);
  }

  SUBCASE("gamma") {
    const auto process = fred::arg_process(fred::make_arg(0.6, 1.5));
    double sum = 0.0, sumsq = 0.0;
    for (long i = 0; i < n; ++i) {
      const double y = fred::stationary_draw(process, rng)[0];
      sum += y;
      sumsq += y * y;
    }
    const double mean = sum / n, var = sumsq / n - mean * mean;
    // Gamma(1.5) / (1 - 0.6): mean 3.75, variance 1.5 / 0.16 = 9.375.
    CHECK(std::abs(mean - 3.75) < 3.5 * std::sqrt(9.375 / n));
    CHECK(std::abs(var - 9.375) < 0.6);
  }

  SUBCASE("chain") {
    Mat p(3, 3);
    p << 0.6, 0.2, 0.1,
         0.3, 0.5, 0.3,
         0.1, 0.3, 0.6;
    const auto process = fred::markov_process(fred::make_markov_chain(p));
    // Reference stationary vector from the balance equations.
    Mat sys = p - Mat::Identity(3, 3);
    sys.row(2).setOnes();
    Vec rhs = testutil::vec({0.0, 0.0, 1.0});
    const Vec pi = sys.partialPivLu().solve(rhs);
    Vec freq = Vec::Zero(3);
    for (long i = 0; i < n; ++i)
      freq[static_cast<int>(std::lround(fred::stationary_draw(process, rng)[0]))] +=
          1.0;
    freq /= static_cast<double>(n);
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(freq[i] - pi[i]) <
            3.5 * std::sqrt(pi[i] * (1.0 - pi[i]) / n));
  }

  SUBCASE("gaussian long run") {
    const auto model = small_var();
    const auto process = fred::gauss_var_process(model);
    // Long-run covariance by iterating the forecast recursion far out.
    const Mat target = fred::sigma_h(model, 400);
    Mat acc = Mat::Zero(2, 2);
    for (long i = 0; i < n; ++i) {
      const Vec y = fred::stationary_draw(process, rng);
      acc += y * y.transpose();
    }
    acc /= static_cast<double>(n);
    CHECK((acc - target).cwiseAbs().maxCoeff() < 0.03);
  }

  SUBCASE("matrix long run") {
    Mat m(2, 2);
    m << 0.5, 0.15,
         -0.1, 0.4;
    Mat sigma(2, 2);
    sigma << 0.8, 0.25,
             0.25, 0.6;
    const auto params = fred::make_war(m, sigma, 3.0);
    const auto process = fred::war_process(params);
    const Mat target = 3.0 * fred::war_sigma_h(params, 400);
    Vec acc = Vec::Zero(4);
    for (long i = 0; i < 20000; ++i) acc += fred::stationary_draw(process, rng);
    acc /= 20000.0;
    Mat mean(2, 2);
    mean << acc[0], acc[1],
            acc[2], acc[3];
    CHECK((mean - target).cwiseAbs().maxCoeff() < 0.1);
  }
}

TEST_CASE("burn-in fallback settles at the fitted two-series mean") {
  const auto q = fitted_binbar();
  const auto process = fred::binbar_process(q);
  CHECK_FALSE(static_cast<bool>(process.stationary));

  const auto rep = fred::binbar_var_representation(q);
  const Vec mu = (Mat::Identity(2, 2) - rep.a).partialPivLu().solve(rep.c);

  fred::RngStream rng(31337);
  const long n = 20000;
  Vec acc = Vec::Zero(2);
  Vec acc2 = Vec::Zero(2);
  for (long i = 0; i < n; ++i) {
    const Vec y = fred::stationary_draw(process, rng, 200);
    acc += y;
    acc2 += y.cwiseProduct(y);
  }
  acc /= static_cast<double>(n);
  acc2 /= static_cast<double>(n);
  for (int c = 0; c < 2; ++c) {
    const double se = std::sqrt((acc2[c] - acc[c] * acc[c]) / n);
    CHECK(std::abs(acc[c] - mu[c]) < 4.0 * se);
  }

  CHECK_THROWS_AS(fred::stationary_draw(process, rng, 0), std::invalid_argument);
}
