#include "fred/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace fred {

namespace {

std::string fmt_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Mat chol_factor(const Mat& m, const char* what) {
  const Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + " is not positive definite");
  return llt.matrixL();
}

// Limit of the forecast error covariance Sigma_h, by iterating the
// recursion to a fixed point.
Mat long_run_cov(const Mat& phi, const Mat& sigma) {
  Mat s = sigma;
  for (int i = 0; i < 100000; ++i) {
    const Mat next = sigma + phi * s * phi.transpose();
    if ((next - s).cwiseAbs().maxCoeff() <
        1e-14 * std::max(1.0, next.cwiseAbs().maxCoeff()))
      return next;
    s = next;
  }
  throw std::runtime_error("long-run covariance iteration did not converge");
}

Vec normal_vec(RngStream& rng, int n) {
  Vec z(n);
  for (int i = 0; i < n; ++i) z[i] = rng.normal();
  return z;
}

int state_index(const Vec& y, int n) {
  const double v = y[0];
  const int idx = static_cast<int>(std::lround(v));
  if (std::abs(v - idx) > 1e-9 || idx < 0 || idx >= n)
    throw std::invalid_argument("chain state " + std::to_string(v) +
                                " is not a valid index");
  return idx;
}

long count_state(double v, const char* what) {
  const long y = std::lround(v);
  if (std::abs(v - y) > 1e-9 || y < 0)
    throw std::invalid_argument(std::string(what) + ": state " +
                                std::to_string(v) +
                                " is not a nonnegative integer");
  return y;
}

}  // namespace

std::string PathSet::to_csv() const {
  std::string out = "path,t,component,value\n";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const Mat& block = paths[i];
    for (int t = 0; t < block.rows(); ++t)
      for (int c = 0; c < block.cols(); ++c)
        out += std::to_string(i) + "," + std::to_string(t) + "," +
               std::to_string(c) + "," + fmt_value(block(t, c)) + "\n";
  }
  return out;
}

PathSet simulate(const StochasticProcess& process, const Vec& y0, int steps,
                 int n_paths, std::uint64_t seed) {
  if (y0.size() != process.dim)
    throw std::invalid_argument(process.name + ": initial state has size " +
                                std::to_string(y0.size()) + ", expected " +
                                std::to_string(process.dim));
  if (steps < 0) throw std::invalid_argument("simulate: steps must be >= 0");
  if (n_paths < 1) throw std::invalid_argument("simulate: need at least one path");

  PathSet out;
  out.dim = process.dim;
  out.paths.resize(n_paths);
  for (int i = 0; i < n_paths; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    Mat block(steps + 1, process.dim);
    Vec state = y0;
    block.row(0) = state.transpose();
    for (int t = 1; t <= steps; ++t) {
      state = process.step(state, rng);
      block.row(t) = state.transpose();
    }
    out.paths[i] = std::move(block);
  }
  return out;
}

Vec stationary_draw(const StochasticProcess& process, RngStream& rng,
                    int burn_in) {
  if (process.stationary) return process.stationary(rng);
  if (burn_in < 1)
    throw std::invalid_argument("stationary_draw: burn-in must be >= 1");
  Vec state = process.default_state;
  for (int t = 0; t < burn_in; ++t) state = process.step(state, rng);
  return state;
}

StochasticProcess gauss_var_process(const GaussianVarModel& model) {
  const int n = model.dim();
  const Mat phi = model.phi;
  const Mat shock = chol_factor(model.sigma, "gauss-var: sigma");
  const Mat longrun = chol_factor(long_run_cov(model.phi, model.sigma),
                                  "gauss-var: long-run covariance");
  StochasticProcess p;
  p.dim = n;
  p.name = "gauss-var";
  p.step = [phi, shock, n](const Vec& y, RngStream& rng) -> Vec {
    return phi * y + shock * normal_vec(rng, n);
  };
  p.stationary = [longrun, n](RngStream& rng) -> Vec {
    return longrun * normal_vec(rng, n);
  };
  p.default_state = Vec::Zero(n);
  return p;
}

StochasticProcess cauchy_process(const CauchyArModel& model) {
  const double phi = model.phi, sigma = model.sigma;
  StochasticProcess p;
  p.dim = 1;
  p.name = "cauchy";
  p.step = [phi, sigma](const Vec& y, RngStream& rng) -> Vec {
    return scalar_vec(rng.cauchy(phi * y[0], sigma));
  };
  // Stable sums: the stationary scale is the geometric sum of |phi|^j sigma.
  const double scale = sigma / (1.0 - std::abs(phi));
  p.stationary = [scale](RngStream& rng) -> Vec {
    return scalar_vec(rng.cauchy(0.0, scale));
  };
  p.default_state = scalar_vec(0.0);
  return p;
}

StochasticProcess markov_process(const MarkovChain& chain) {
  const Mat p_mat = chain.p;
  const int n = chain.n();

  // Stationary distribution: the probability vector fixed by the transition
  // matrix, found by replacing one balance equation with normalization.
  Mat sys = p_mat - Mat::Identity(n, n);
  sys.row(n - 1).setOnes();
  Vec rhs = Vec::Zero(n);
  rhs[n - 1] = 1.0;
  const Vec pi = sys.partialPivLu().solve(rhs);

  StochasticProcess p;
  p.dim = 1;
  p.name = "markov";
  p.step = [p_mat, n](const Vec& y, RngStream& rng) -> Vec {
    const int j = state_index(y, n);
    double u = rng.uniform(), acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += p_mat(i, j);
      if (u < acc) return scalar_vec(i);
    }
    return scalar_vec(n - 1);
  };
  p.stationary = [pi, n](RngStream& rng) -> Vec {
    double u = rng.uniform(), acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += pi[i];
      if (u < acc) return scalar_vec(i);
    }
    return scalar_vec(n - 1);
  };
  p.default_state = scalar_vec(0.0);
  return p;
}

StochasticProcess inar_process(const InarParams& params) {
  StochasticProcess p;
  p.dim = 1;
  p.name = "inar";
  p.step = [params](const Vec& y, RngStream& rng) -> Vec {
    const long count = count_state(y[0], "inar");
    return scalar_vec(rng.binomial(count, params.p) + rng.poisson(params.lambda));
  };
  const double mean = params.lambda / (1.0 - params.p);
  p.stationary = [mean](RngStream& rng) -> Vec {
    return scalar_vec(rng.poisson(mean));
  };
  p.default_state = scalar_vec(std::round(mean));
  return p;
}

StochasticProcess nbar_process(const NbarParams& params) {
  StochasticProcess p;
  p.dim = 1;
  p.name = "nbar";
  p.step = [params](const Vec& y, RngStream& rng) -> Vec {
    const long count = count_state(y[0], "nbar");
    const double intensity = rng.gamma(params.delta + count);
    return scalar_vec(rng.poisson(params.rho * intensity));
  };
  const double bc_inf = params.rho / (1.0 - params.rho);
  p.stationary = [params, bc_inf](RngStream& rng) -> Vec {
    return scalar_vec(rng.poisson(bc_inf * rng.gamma(params.delta)));
  };
  p.default_state = scalar_vec(std::round(bc_inf * params.delta));
  return p;
}

StochasticProcess arg_process(const ArgParams& params) {
  StochasticProcess p;
  p.dim = 1;
  p.name = "arg";
  p.step = [params](const Vec& y, RngStream& rng) -> Vec {
    if (!(y[0] >= 0.0))
      throw std::invalid_argument("arg: state must be >= 0");
    const long z = rng.poisson(params.beta * y[0]);
    return scalar_vec(rng.gamma(params.delta + z));
  };
  const double scale = 1.0 / (1.0 - params.beta);
  p.stationary = [params, scale](RngStream& rng) -> Vec {
    return scalar_vec(scale * rng.gamma(params.delta));
  };
  p.default_state = scalar_vec(params.delta * scale);
  return p;
}

StochasticProcess binbar_process(const BinbarParams& params) {
  StochasticProcess p;
  p.dim = 2;
  p.name = "binbar";
  p.step = [params](const Vec& y, RngStream& rng) -> Vec {
    const long y1 = count_state(y[0], "binbar");
    const long y2 = count_state(y[1], "binbar");
    const double x1 = rng.gamma(params.delta1 + y1);
    const double x2 = rng.gamma(params.delta2 + y2);
    // Negative feedback loadings can push the common shape (and, with
    // negative alpha, the intensity) below zero for extreme states; both
    // laws degenerate to a point mass at zero there, hence the clamps.
    const double z_shape =
        std::max(params.delta + params.sigma1 * y1 + params.sigma2 * y2, 1e-12);
    const double z = rng.gamma(z_shape);
    Vec out(2);
    out[0] = rng.poisson(std::max(params.alpha1 * z + params.beta1 * x1, 0.0));
    out[1] = rng.poisson(std::max(params.alpha2 * z + params.beta2 * x2, 0.0));
    return out;
  };
  const BinbarVarRep rep = binbar_var_representation(params);
  const Vec mean = (Mat::Identity(2, 2) - rep.a).partialPivLu().solve(rep.c);
  p.default_state = mean.cwiseMax(0.0).array().round();
  return p;
}

StochasticProcess war_process(const WarParams& params) {
  const int n = static_cast<int>(params.m.rows());
  const int k = static_cast<int>(std::lround(params.k_dof));
  if (std::abs(params.k_dof - k) > 1e-9 || k < 1)
    throw std::invalid_argument(
        "war: simulation needs a positive integer degrees-of-freedom");
  const Mat shock = chol_factor(params.sigma, "war: sigma");
  const Mat longrun = chol_factor(long_run_cov(params.m, params.sigma),
                                  "war: long-run covariance");

  const auto unflatten = [n](const Vec& y) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = y[i * n + j];
    return m;
  };
  const auto flatten = [n](const Mat& m) {
    Vec out(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] = m(i, j);
    return out;
  };

  StochasticProcess p;
  p.dim = n * n;
  p.name = "war";
  p.step = [params, shock, n, k, unflatten, flatten](const Vec& y,
                                                     RngStream& rng) -> Vec {
    const Mat state = unflatten(y);
    // Any factor decomposition of the state works: the transition law only
    // depends on the state through M Y M', so the choice of columns summing
    // to Y does not matter.  Use the eigenvalue square root and pad with
    // zero columns up to the degrees of freedom.
    const Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (state + state.transpose()));
    if (es.eigenvalues().minCoeff() <
        -1e-9 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
      throw std::invalid_argument("war: state must be positive semi-definite");
    Mat next = Mat::Zero(n, n);
    for (int col = 0; col < k; ++col) {
      Vec x = Vec::Zero(n);
      if (col < n)
        x = std::sqrt(std::max(es.eigenvalues()[col], 0.0)) *
            es.eigenvectors().col(col);
      const Vec moved = params.m * x + shock * normal_vec(rng, n);
      next += moved * moved.transpose();
    }
    return flatten(next);
  };
  p.stationary = [longrun, n, k, flatten](RngStream& rng) -> Vec {
    Mat y = Mat::Zero(n, n);
    for (int col = 0; col < k; ++col) {
      const Vec x = longrun * normal_vec(rng, n);
      y += x * x.transpose();
    }
    return flatten(y);
  };
  p.default_state = flatten(params.k_dof * long_run_cov(params.m, params.sigma));
  return p;
}

}  // namespace fred
