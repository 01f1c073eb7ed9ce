#include <cmath>

#include "doctest.h"

#include "fred/optim.hpp"
#include "test_util.hpp"

using fred::Vec;
using testutil::vec;

TEST_CASE("simplex finds the minimum of a shifted quadratic") {
  const auto f = [](const Vec& x) {
    return (x[0] - 1.0) * (x[0] - 1.0) + 3.0 * (x[1] + 2.0) * (x[1] + 2.0);
  };
  const auto r = fred::nelder_mead(f, vec({0.0, 0.0}));
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x[1] == doctest::Approx(-2.0).epsilon(1e-5));
  CHECK(r.value == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("simplex crawls down the rosenbrock valley") {
  const auto f = [](const Vec& x) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
  };
  const auto r = fred::nelder_mead(f, vec({-1.2, 1.0}), 0.5, 1e-14, 50000);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("iteration cap reports non-convergence") {
  const auto f = [](const Vec& x) { return x[0] * x[0]; };
  const auto r = fred::nelder_mead(f, vec({100.0}), 0.1, 1e-16, 3);
  CHECK_FALSE(r.converged);
}

TEST_CASE("finite-difference gradient matches analytic derivatives") {
  const auto f = [](const Vec& x) {
    return std::exp(x[0]) * std::sin(x[1]) + x[0] * x[1];
  };
  const Vec x = vec({0.3, -1.1});
  const Vec g = fred::fd_gradient(f, x);
  CHECK(g[0] == doctest::Approx(std::exp(0.3) * std::sin(-1.1) - 1.1).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(std::exp(0.3) * std::cos(-1.1) + 0.3).epsilon(1e-8));
}

TEST_CASE("finite-difference jacobian matches analytic derivatives") {
  const auto f = [](const Vec& x) {
    Vec y(2);
    y[0] = x[0] * x[0] + x[1];
    y[1] = std::cos(x[0]) * x[1];
    return y;
  };
  const Vec x = vec({0.7, 2.0});
  const fred::Mat j = fred::fd_jacobian(f, x);
  REQUIRE(j.rows() == 2);
  REQUIRE(j.cols() == 2);
  CHECK(j(0, 0) == doctest::Approx(1.4).epsilon(1e-7));
  CHECK(j(0, 1) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(j(1, 0) == doctest::Approx(-std::sin(0.7) * 2.0).epsilon(1e-7));
  CHECK(j(1, 1) == doctest::Approx(std::cos(0.7)).epsilon(1e-7));
}

TEST_CASE("finite-difference hessian is exact on quadratics") {
  const auto f = [](const Vec& x) {
    return 2.0 * x[0] * x[0] + 3.0 * x[0] * x[1] + 5.0 * x[1] * x[1];
  };
  const fred::Mat h = fred::fd_hessian_at(f, vec({0.4, -0.9}));
  CHECK(h(0, 0) == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(h(0, 1) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(h(1, 0) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(h(1, 1) == doctest::Approx(10.0).epsilon(1e-6));
}
