#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "fred/markov.hpp"
#include "fred/positive.hpp"
#include "fred/registry.hpp"
#include "fred/table.hpp"
#include "test_util.hpp"

using fred::Kind;
using fred::Vec;

namespace {

const char* params_for(const std::string& id) {
  if (id == "gauss-var") return R"({"phi": [0.6], "sigma": [1.0]})";
  if (id == "cauchy") return R"({"phi": 0.6, "sigma": 1.2})";
  if (id == "markov") return R"({"p": [0.9, 0.1, 0.3, 0.7], "n": 2})";
  if (id == "binary-chain") return R"({"pi": 0.3, "lambda": 0.6})";
  if (id == "inar") return R"({"p": 0.4, "lambda": 1.5})";
  if (id == "nbar") return R"({"rho": 0.5, "delta": 2.0})";
  if (id == "nbar2")
    return R"({"alpha1": 0.118, "alpha2": -0.067, "beta1": 0.647,
               "beta2": 0.391, "delta1": 1.2, "delta2": 1.27,
               "sigma1": -0.075, "sigma2": 0.453, "delta": 1.492})";
  if (id == "arg") return R"({"beta": 0.7, "delta": 1.3})";
  if (id == "war")
    return R"({"m": [0.5, 0.15, -0.1, 0.4],
               "sigma": [0.8, 0.25, 0.25, 0.6], "k_dof": 3})";
  FAIL("no parameters wired for model id ", id);
  return "{}";
}

// A decomposition request each model accepts for the given kind, sized to
// its state.
fred::DecomposeRequest request_for(const std::string& id, Kind kind) {
  fred::DecomposeRequest req;
  req.kind = kind;
  req.max_h = 4;
  if (id == "gauss-var") {
    req.argument = testutil::vec({0.8});
    req.state = testutil::vec({0.3});
  } else if (id == "cauchy") {
    req.argument = testutil::vec({0.4});
    req.state = testutil::vec({0.1});
  } else if (id == "markov" || id == "binary-chain") {
    req.argument = kind == Kind::feld ? testutil::vec({0.5, 1.5})
                                      : testutil::vec({1.0});
    req.state = testutil::vec({0.0});
  } else if (id == "inar" || id == "nbar" || id == "arg") {
    req.argument = testutil::vec({0.8});
    req.state = testutil::vec({2.0});
  } else if (id == "nbar2") {
    req.argument = kind == Kind::fevd ? testutil::vec({1.0, 0.0})
                                      : testutil::vec({0.3, 0.4});
    req.state = testutil::vec({2.0, 1.0});
  } else if (id == "war") {
    req.argument = testutil::vec({0.3, 0.1, 0.1, 0.2});
    req.state = testutil::vec({1.0, 0.2, 0.2, 0.8});
  }
  return req;
}

}  // namespace

TEST_CASE("registry lists every constructible model") {
  const std::vector<std::string> ids = fred::registry_ids();
  REQUIRE(ids == std::vector<std::string>{"gauss-var", "cauchy", "markov",
                                          "binary-chain", "inar", "nbar",
                                          "nbar2", "arg", "war"});
  for (const std::string& id : ids) {
    CAPTURE(id);
    const fred::ModelHandle handle = fred::make_model(id, params_for(id));
    CHECK(handle.id == id);
    CHECK(handle.state_dim >= 1);
    CHECK(handle.process.dim == handle.state_dim);
    CHECK_FALSE(handle.capabilities.empty());
    CHECK(bool(handle.decompose));
  }

  const fred::ModelHandle war = fred::make_model("war", params_for("war"));
  CHECK(war.state_dim == 4);
  CHECK(war.matrix_n == 2);
}

TEST_CASE("capabilities match what decompose accepts") {
  for (const std::string& id : fred::registry_ids()) {
    const fred::ModelHandle handle = fred::make_model(id, params_for(id));
    for (const Kind kind : {Kind::fekd, Kind::feld, Kind::fevd}) {
      INFO("model ", id, " kind ", fred::to_string(kind));
      const fred::DecomposeRequest req = request_for(id, kind);
      if (fred::model_supports(handle, kind)) {
        const fred::DecompositionTable table = handle.decompose(req);
        CHECK(table.kind == kind);
        CHECK(table.horizons.back() == req.max_h);
        // Every produced table satisfies the additivity identity.
        for (const auto& [h, residual] : table.residuals)
          CHECK(std::abs(residual) <
                1e-5 * std::max(1.0, std::abs(table.total(h))));
      } else {
        CHECK_THROWS_AS(handle.decompose(req), std::invalid_argument);
      }
    }
  }
}

TEST_CASE("heavy tails disable the transform-based decompositions") {
  const fred::ModelHandle cauchy = fred::make_model("cauchy",
                                                    params_for("cauchy"));
  CHECK_THROWS_WITH_AS(cauchy.decompose(request_for("cauchy", Kind::feld)),
                       doctest::Contains("Laplace transform"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(cauchy.decompose(request_for("cauchy", Kind::fevd)),
                       doctest::Contains("square-integrable"),
                       std::invalid_argument);
}

TEST_CASE("markov parameters are read column by column") {
  // Asymmetric transition matrix: staying probabilities 0.9 and 0.7.  A
  // row-major misread would swap the off-diagonal entries.
  fred::Mat p(2, 2);
  p << 0.9, 0.3,
       0.1, 0.7;
  const fred::MarkovChain chain = fred::make_markov_chain(p);
  const fred::ModelHandle handle = fred::make_model("markov",
                                                    params_for("markov"));

  const fred::DecompositionTable direct = fred::mc_fekd(chain, 1, 0, 4);
  const fred::DecompositionTable via = handle.decompose(
      request_for("markov", Kind::fekd));
  for (int h = 1; h <= 4; ++h) {
    CHECK(via.total(h) == doctest::Approx(direct.total(h)).epsilon(1e-14));
    for (int k = 0; k + 1 < h; ++k)
      CHECK(via.term(h, k) == doctest::Approx(direct.term(h, k)).epsilon(1e-14));
  }
}

TEST_CASE("registry war decomposition matches the direct call") {
  const fred::ModelHandle handle = fred::make_model("war", params_for("war"));
  const fred::DecomposeRequest req = request_for("war", Kind::feld);

  fred::Mat m(2, 2), sigma(2, 2), gamma(2, 2), state(2, 2);
  m << 0.5, 0.15, -0.1, 0.4;
  sigma << 0.8, 0.25, 0.25, 0.6;
  gamma << 0.3, 0.1, 0.1, 0.2;
  state << 1.0, 0.2, 0.2, 0.8;
  const fred::WarParams war = fred::make_war(m, sigma, 3.0);
  const fred::DecompositionTable direct = fred::war_feld(war, gamma, state, 4);

  const fred::DecompositionTable via = handle.decompose(req);
  CHECK(via.matrix_n == 2);
  for (int h = 1; h <= 4; ++h) {
    CHECK(via.total(h) == direct.total(h));
    for (int k = 0; k < h; ++k) CHECK(via.term(h, k) == direct.term(h, k));
  }
}

TEST_CASE("scalar variance decompositions accept a default direction") {
  const fred::ModelHandle inar = fred::make_model("inar", params_for("inar"));

  fred::DecomposeRequest req;
  req.kind = Kind::fevd;
  req.max_h = 4;
  req.state = testutil::vec({2.0});
  const fred::DecompositionTable implicit = inar.decompose(req);

  req.argument = testutil::vec({1.0});
  const fred::DecompositionTable unit = inar.decompose(req);
  for (int h = 1; h <= 4; ++h)
    CHECK(implicit.total(h) == unit.total(h));

  // The table is the quadratic form in the direction, so scaling the
  // direction by 2 scales every entry by 4.
  req.argument = testutil::vec({2.0});
  const fred::DecompositionTable doubled = inar.decompose(req);
  for (int h = 1; h <= 4; ++h) {
    CHECK(doubled.total(h) == doctest::Approx(4.0 * unit.total(h)));
    for (int k = 0; k < h; ++k)
      CHECK(doubled.term(h, k) == doctest::Approx(4.0 * unit.term(h, k)));
  }

  req.argument = testutil::vec({0.0});
  CHECK_THROWS_WITH_AS(inar.decompose(req), doctest::Contains("zero"),
                       std::invalid_argument);

  // The bivariate model cannot default the direction.
  const fred::ModelHandle nbar2 = fred::make_model("nbar2",
                                                   params_for("nbar2"));
  fred::DecomposeRequest missing;
  missing.kind = Kind::fevd;
  missing.max_h = 3;
  missing.state = testutil::vec({2.0, 1.0});
  CHECK_THROWS_WITH_AS(nbar2.decompose(missing),
                       doctest::Contains("length 2"), std::invalid_argument);
}

TEST_CASE("bad construction inputs carry precise messages") {
  CHECK_THROWS_WITH_AS(fred::make_model("garch", "{}"),
                       doctest::Contains("known: gauss-var"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(fred::make_model("nbar", "{oops"),
                       doctest::Contains("not valid JSON"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(fred::make_model("nbar", "[1, 2]"),
                       doctest::Contains("JSON object"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(fred::make_model("nbar", R"({"rho": 0.5})"),
                       doctest::Contains("missing numeric field 'delta'"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(fred::make_model("nbar", R"({"rho": "x", "delta": 1})"),
                       doctest::Contains("missing numeric field 'rho'"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      fred::make_model("gauss-var", R"({"phi": [1, 2, 3], "sigma": [1]})"),
      doctest::Contains("square matrix"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      fred::make_model("markov", R"({"p": [0.9, 0.1, 0.3, 0.7]})"),
      doctest::Contains("integer field 'n'"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      fred::make_model("markov", R"({"p": [0.9, 0.1], "n": 2})"),
      doctest::Contains("n*n entries"), std::invalid_argument);
  // Columns that do not sum to one fail in the chain constructor.
  CHECK_THROWS_AS(
      fred::make_model("markov", R"({"p": [0.9, 0.2, 0.3, 0.7], "n": 2})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      fred::make_model("war", R"({"m": [0.5], "sigma": [1.0]})"),
      std::invalid_argument);
}

TEST_CASE("bad request shapes carry precise messages") {
  const fred::ModelHandle var2 = fred::make_model(
      "gauss-var",
      R"({"phi": [0.5, 0.1, 0.0, 0.4], "sigma": [1.0, 0.2, 0.2, 0.9]})");
  fred::DecomposeRequest req;
  req.kind = Kind::feld;
  req.max_h = 3;
  req.argument = testutil::vec({1.0});
  CHECK_THROWS_WITH_AS(var2.decompose(req),
                       doctest::Contains("must have length 2"),
                       std::invalid_argument);

  const fred::ModelHandle markov = fred::make_model("markov",
                                                    params_for("markov"));
  fred::DecomposeRequest idx;
  idx.kind = Kind::fekd;
  idx.max_h = 3;
  idx.argument = testutil::vec({0.5});
  idx.state = testutil::vec({0.0});
  CHECK_THROWS_WITH_AS(markov.decompose(idx),
                       doctest::Contains("state index"),
                       std::invalid_argument);
  idx.argument = testutil::vec({5.0});
  CHECK_THROWS_AS(markov.decompose(idx), std::invalid_argument);
}
