#include "fred/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "json.hpp"

namespace fred {

namespace {

struct OlsFit {
  Vec beta;
  Mat cov;  // heteroskedasticity-robust (HC0)
  Vec residuals;
};

OlsFit ols_hc0(const Mat& x, const Vec& y) {
  const Eigen::LDLT<Mat> gram(x.transpose() * x);
  if (gram.info() != Eigen::Success)
    throw std::runtime_error("least squares: singular regressor matrix");
  OlsFit fit;
  fit.beta = gram.solve(x.transpose() * y);
  fit.residuals = y - x * fit.beta;
  Mat meat = Mat::Zero(x.cols(), x.cols());
  for (int t = 0; t < x.rows(); ++t) {
    const Vec row = x.row(t).transpose();
    meat += fit.residuals[t] * fit.residuals[t] * row * row.transpose();
  }
  const Mat bread = gram.solve(Mat::Identity(x.cols(), x.cols()));
  fit.cov = bread * meat * bread;
  return fit;
}

std::vector<long> count_series(const std::vector<double>& series,
                               const char* what) {
  if (series.size() < 10)
    throw std::invalid_argument(std::string(what) +
                                ": series too short (need at least 10)");
  std::vector<long> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    out[t] = std::lround(series[t]);
    if (std::abs(series[t] - out[t]) > 1e-9 || out[t] < 0)
      throw std::invalid_argument(std::string(what) + ": observation " +
                                  std::to_string(t) +
                                  " is not a nonnegative integer");
  }
  return out;
}

Vec pack_binbar(const BinbarParams& q) {
  Vec v(9);
  v << q.alpha1, q.alpha2, q.beta1, q.beta2, q.delta1, q.delta2, q.sigma1,
      q.sigma2, q.delta;
  return v;
}

BinbarParams unpack_binbar(const Vec& v) {
  return BinbarParams{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
}

const std::vector<std::string> kBinbarNames = {
    "alpha1", "alpha2", "beta1",  "beta2", "delta1",
    "delta2", "sigma1", "sigma2", "delta"};

}  // namespace

std::string EstimationResult::to_json() const {
  nlohmann::json j;
  j["method"] = method;
  nlohmann::json theta_obj, se_obj;
  for (std::size_t i = 0; i < names.size(); ++i) {
    theta_obj[names[i]] = theta[static_cast<int>(i)];
    se_obj[names[i]] = se[static_cast<int>(i)];
  }
  j["theta"] = theta_obj;
  j["se"] = se_obj;
  std::vector<double> flat;
  flat.reserve(cov.size());
  for (int i = 0; i < cov.rows(); ++i)
    for (int k = 0; k < cov.cols(); ++k) flat.push_back(cov(i, k));
  j["cov"] = flat;
  j["diagnostics"] = diagnostics;
  return j.dump(2);
}

EstimationResult nbar_ols(const std::vector<double>& series) {
  count_series(series, "nbar_ols");
  const int t_max = static_cast<int>(series.size()) - 1;
  Mat x(t_max, 2);
  Vec y(t_max);
  for (int t = 0; t < t_max; ++t) {
    x(t, 0) = 1.0;
    x(t, 1) = series[t];
    y[t] = series[t + 1];
  }
  const OlsFit fit = ols_hc0(x, y);
  const double intercept = fit.beta[0], slope = fit.beta[1];
  if (!(slope > 0.0 && slope < 1.0))
    throw std::runtime_error("nbar_ols: slope " + std::to_string(slope) +
                             " outside (0,1); series is not mean-reverting");

  // theta = (rho, delta) = (slope, intercept/slope); map the regression
  // covariance through the Jacobian of that transformation.
  Mat jac(2, 2);
  jac << 0.0, 1.0,
         1.0 / slope, -intercept / (slope * slope);
  EstimationResult result;
  result.method = "nbar-ols";
  result.names = {"rho", "delta"};
  result.theta = Vec(2);
  result.theta << slope, intercept / slope;
  result.cov = jac * fit.cov * jac.transpose();
  result.se = result.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  result.diagnostics["intercept"] = intercept;
  result.diagnostics["slope"] = slope;
  result.diagnostics["n_transitions"] = t_max;
  return result;
}

namespace {

double nbar_mean_nll(const std::vector<long>& counts, const NbarParams& q) {
  double total = 0.0;
  for (std::size_t t = 1; t < counts.size(); ++t)
    total -= nbar_transition_logpmf(q, static_cast<int>(counts[t]),
                                    static_cast<int>(counts[t - 1]));
  return total / static_cast<double>(counts.size() - 1);
}

}  // namespace

EstimationResult nbar_mle(const std::vector<double>& series) {
  const EstimationResult ols = nbar_ols(series);
  return nbar_mle(series, NbarParams{ols.theta[0], std::max(ols.theta[1], 1e-3)});
}

EstimationResult nbar_mle(const std::vector<double>& series,
                          const NbarParams& start) {
  const std::vector<long> counts = count_series(series, "nbar_mle");
  if (!(start.rho > 0.0 && start.rho < 1.0 && start.delta > 0.0))
    throw std::invalid_argument("nbar_mle: invalid starting point");

  // Optimize over (logit rho, log delta) so the search stays in-domain.
  const auto to_params = [](const Vec& z) {
    return NbarParams{1.0 / (1.0 + std::exp(-z[0])), std::exp(z[1])};
  };
  const auto objective = [&](const Vec& z) {
    return nbar_mean_nll(counts, to_params(z));
  };
  Vec z0(2);
  z0 << std::log(start.rho / (1.0 - start.rho)), std::log(start.delta);
  const NelderMeadResult opt = nelder_mead(objective, z0, 0.25, 1e-12);
  const NbarParams fitted = to_params(opt.x);

  // Observed information in the original coordinates.
  Vec theta(2);
  theta << fitted.rho, fitted.delta;
  const auto nll_orig = [&](const Vec& p) {
    return nbar_mean_nll(counts, NbarParams{p[0], p[1]});
  };
  const double n = static_cast<double>(counts.size() - 1);
  const Mat info = n * fd_hessian_at(nll_orig, theta, 1e-4);
  const Eigen::LDLT<Mat> ldlt(info);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("nbar_mle: information matrix is not invertible");

  const double grad_norm = fd_gradient(nll_orig, theta).norm();

  EstimationResult result;
  result.method = "nbar-mle";
  result.names = {"rho", "delta"};
  result.theta = theta;
  result.cov = ldlt.solve(Mat::Identity(2, 2));
  result.se = result.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  result.diagnostics["loglik"] = -opt.value * n;
  result.diagnostics["grad_norm"] = grad_norm;
  result.diagnostics["iterations"] = opt.iterations;
  result.diagnostics["converged"] =
      (opt.converged && grad_norm < 1e-3) ? 1.0 : 0.0;
  result.diagnostics["n_transitions"] = n;
  return result;
}

EstimationResult binbar_ols(const Mat& series) {
  if (series.cols() != 2 || series.rows() < 10)
    throw std::invalid_argument("binbar_ols: need a T x 2 series with T >= 10");
  const int t_max = static_cast<int>(series.rows()) - 1;
  Mat x(t_max, 3);
  for (int t = 0; t < t_max; ++t) {
    x(t, 0) = 1.0;
    x(t, 1) = series(t, 0);
    x(t, 2) = series(t, 1);
  }

  EstimationResult result;
  result.method = "binbar-ols";
  result.names = {"c1", "a11", "a12", "c2", "a21", "a22"};
  result.theta = Vec(6);
  result.cov = Mat::Zero(6, 6);
  Mat a_hat(2, 2);
  for (int eq = 0; eq < 2; ++eq) {
    Vec y(t_max);
    for (int t = 0; t < t_max; ++t) y[t] = series(t + 1, eq);
    const OlsFit fit = ols_hc0(x, y);
    result.theta.segment(3 * eq, 3) = fit.beta;
    result.cov.block(3 * eq, 3 * eq, 3, 3) = fit.cov;
    a_hat(eq, 0) = fit.beta[1];
    a_hat(eq, 1) = fit.beta[2];
  }
  result.se = result.cov.diagonal().cwiseMax(0.0).cwiseSqrt();

  const Eigen::VectorXcd eig = a_hat.eigenvalues();
  result.diagnostics["eig_modulus_1"] = std::abs(eig[0]);
  result.diagnostics["eig_modulus_2"] = std::abs(eig[1]);
  result.diagnostics["n_transitions"] = t_max;
  return result;
}

std::vector<GmmQuadruplet> default_binbar_quadruplets() {
  // Nine points of the {0.01, 0.41}^4 grid.  The full grid is numerically
  // redundant; this subset keeps the moment Jacobian well conditioned while
  // covering own-, cross- and joint-argument combinations.
  const double lo = 0.01, hi = 0.41;
  return {
      {lo, lo, lo, lo}, {hi, lo, lo, lo}, {lo, hi, lo, lo},
      {lo, lo, hi, lo}, {lo, lo, lo, hi}, {hi, hi, hi, hi},
      {hi, lo, hi, lo}, {hi, hi, lo, lo}, {lo, hi, lo, hi},
  };
}

namespace {

// Stacked moment contributions: one row per transition, one column per
// moment (quadruplets first, then the six least-squares conditions).
Mat binbar_moment_rows(const Mat& series, const BinbarParams& q,
                       const std::vector<GmmQuadruplet>& quads) {
  const int t_max = static_cast<int>(series.rows()) - 1;
  const int n_m = static_cast<int>(quads.size()) + 6;
  Mat rows(t_max, n_m);

  std::vector<Vec> a_of_u(quads.size());
  std::vector<double> b_of_u(quads.size());
  for (std::size_t j = 0; j < quads.size(); ++j) {
    Vec u(2);
    u << quads[j].u1, quads[j].u2;
    binbar_one_step(q, u, a_of_u[j], b_of_u[j]);
  }
  const BinbarVarRep rep = binbar_var_representation(q);

  for (int t = 0; t < t_max; ++t) {
    const Vec prev = series.row(t).transpose();
    const Vec curr = series.row(t + 1).transpose();
    for (std::size_t j = 0; j < quads.size(); ++j) {
      const double psi = std::exp(-a_of_u[j].dot(prev) - b_of_u[j]);
      const double instrument =
          std::exp(-quads[j].v1 * prev[0] - quads[j].v2 * prev[1]);
      const double target = std::exp(-quads[j].u1 * curr[0] -
                                     quads[j].u2 * curr[1]);
      rows(t, static_cast<int>(j)) = (target - psi) * instrument;
    }
    const Vec resid = curr - rep.a * prev - rep.c;
    const int base = static_cast<int>(quads.size());
    rows(t, base + 0) = resid[0];
    rows(t, base + 1) = resid[0] * prev[0];
    rows(t, base + 2) = resid[0] * prev[1];
    rows(t, base + 3) = resid[1];
    rows(t, base + 4) = resid[1] * prev[0];
    rows(t, base + 5) = resid[1] * prev[1];
  }
  return rows;
}

Vec binbar_mean_moments(const Mat& series, const BinbarParams& q,
                        const std::vector<GmmQuadruplet>& quads) {
  const Mat rows = binbar_moment_rows(series, q, quads);
  return rows.colwise().mean().transpose();
}

}  // namespace

EstimationResult binbar_gmm(const Mat& series) {
  return binbar_gmm(series,
                    BinbarParams{0.1, 0.1, 0.4, 0.4, 1.0, 1.0, 0.1, 0.1, 1.0});
}

EstimationResult binbar_gmm(const Mat& series, const BinbarParams& start,
                            const std::vector<GmmQuadruplet>& quadruplets) {
  if (series.cols() != 2 || series.rows() < 20)
    throw std::invalid_argument("binbar_gmm: need a T x 2 series with T >= 20");
  if (quadruplets.empty())
    throw std::invalid_argument("binbar_gmm: no moment quadruplets given");
  make_binbar(start);
  const double t_eff = static_cast<double>(series.rows() - 1);
  const int n_m = static_cast<int>(quadruplets.size()) + 6;

  const auto objective_in = [&](const Mat& weight) {
    return [&series, &quadruplets, weight](const Vec& v) {
      BinbarParams q;
      try {
        q = make_binbar(unpack_binbar(v));
      } catch (const std::invalid_argument&) {
        return 1e100;  // out of the admissible region, push the simplex back
      }
      const Vec m = binbar_mean_moments(series, q, quadruplets);
      return static_cast<double>(m.dot(weight * m));
    };
  };

  // Step 1: identity weighting.
  const NelderMeadResult step1 =
      nelder_mead(objective_in(Mat::Identity(n_m, n_m)), pack_binbar(start),
                  0.05, 1e-16, 40000);
  const BinbarParams theta1 = unpack_binbar(step1.x);

  // Step 2: weight by the inverse moment covariance at the first estimate.
  const Mat rows1 = binbar_moment_rows(series, theta1, quadruplets);
  const Vec mean1 = rows1.colwise().mean().transpose();
  Mat s = Mat::Zero(n_m, n_m);
  for (int t = 0; t < rows1.rows(); ++t) {
    const Vec d = rows1.row(t).transpose() - mean1;
    s += d * d.transpose();
  }
  s /= t_eff;
  s += 1e-12 * s.trace() / n_m * Mat::Identity(n_m, n_m);
  const Mat weight2 = s.ldlt().solve(Mat::Identity(n_m, n_m));

  const auto obj2 = objective_in(weight2);
  const NelderMeadResult step2 = nelder_mead(obj2, step1.x, 0.02, 1e-16, 40000);
  const BinbarParams theta2 = unpack_binbar(step2.x);

  // Sandwich covariance with a finite-difference moment Jacobian.
  const auto mean_moments = [&](const Vec& v) {
    return binbar_mean_moments(series, unpack_binbar(v), quadruplets);
  };
  const Mat g = fd_jacobian(mean_moments, step2.x);
  const Mat gw = g.transpose() * weight2;
  const Mat bread = (gw * g).ldlt().solve(Mat::Identity(9, 9));
  const Mat cov = bread * gw * s * gw.transpose() * bread / t_eff;

  const Vec m2 = binbar_mean_moments(series, theta2, quadruplets);

  EstimationResult result;
  result.method = "binbar-gmm";
  result.names = kBinbarNames;
  result.theta = step2.x;
  result.cov = cov;
  result.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  result.diagnostics["objective_step1_w2"] = obj2(step1.x);
  result.diagnostics["objective_step2_w2"] = step2.value;
  result.diagnostics["j_stat"] = t_eff * m2.dot(weight2 * m2);
  result.diagnostics["n_transitions"] = t_eff;

  const Eigen::JacobiSVD<Mat> svd(g);
  result.diagnostics["jacobian_min_singular"] =
      svd.singularValues().minCoeff();
  result.diagnostics["jacobian_rank_deficit"] =
      9.0 - (svd.singularValues().array() >
             1e-10 * svd.singularValues().maxCoeff())
                .count();
  return result;
}

DeltaBand delta_band(const VectorFn& quantity, const Vec& theta,
                     const Mat& cov, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("delta_band: level must be in (0,1)");
  if (cov.rows() != theta.size() || cov.cols() != theta.size())
    throw std::invalid_argument("delta_band: covariance shape mismatch");

  const Mat jac = fd_jacobian(quantity, theta);
  const Mat omega = jac * cov * jac.transpose();
  const double z =
      boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + level));

  DeltaBand band;
  band.value = quantity(theta);
  band.std_error = omega.diagonal().cwiseMax(0.0).cwiseSqrt();
  band.lower = band.value - z * band.std_error;
  band.upper = band.value + z * band.std_error;
  return band;
}

double arg_compound_beta_sensitivity(const ArgParams& params, double u,
                                     int m) {
  if (m < 0) throw std::invalid_argument("arg sensitivity: m must be >= 0");
  const double beta = params.beta;
  // d a-compound-m / d beta = a'(a-compound-(m-1)) d a-compound-(m-1) / d beta
  //                           + (da/dbeta)(a-compound-(m-1)).
  double value = u;       // a-compound-(m) as the recursion advances
  double sensitivity = 0.0;
  for (int j = 1; j <= m; ++j) {
    const double denom = 1.0 + value;
    sensitivity = beta / (denom * denom) * sensitivity + value / denom;
    value = beta * value / denom;
  }
  return sensitivity;
}

namespace {

struct KernelSmoother {
  const std::vector<double>* series;
  double bandwidth;

  // Weighted average of targets[t] with weights K((series[t] - y)/b) over
  // t = 0..limit-1.
  double smooth(const std::vector<double>& targets, int limit, double y,
                const char* what) const {
    double wsum = 0.0, acc = 0.0;
    for (int t = 0; t < limit; ++t) {
      const double z = ((*series)[t] - y) / bandwidth;
      const double w = std::exp(-0.5 * z * z);
      wsum += w;
      acc += w * targets[t];
    }
    if (wsum < 1e-12)
      throw std::runtime_error(std::string(what) +
                               ": kernel weights vanish at the evaluation point");
    return acc / wsum;
  }
};

}  // namespace

NwFeldResult nw_feld(const std::vector<double>& series, double u, double y,
                     int h, const KernelSpec& spec) {
  const int t_len = static_cast<int>(series.size());
  if (h < 1) throw std::invalid_argument("nw_feld: h must be >= 1");
  if (t_len < h + 8)
    throw std::invalid_argument("nw_feld: series too short for this horizon");

  double bandwidth = spec.bandwidth;
  if (bandwidth <= 0.0) {
    double mean = 0.0;
    for (const double v : series) mean += v;
    mean /= t_len;
    double var = 0.0;
    for (const double v : series) var += (v - mean) * (v - mean);
    var /= (t_len - 1);
    bandwidth = 1.06 * std::sqrt(var) * std::pow(t_len, -0.2);
    if (!(bandwidth > 0.0))
      throw std::runtime_error("nw_feld: degenerate series, zero bandwidth");
  }
  const KernelSmoother smoother{&series, bandwidth};

  // Fitted m-step transforms, each using every index with a valid lead.
  const auto psi_hat = [&](double at, int m) -> double {
    if (m == 0) return std::exp(-u * at);
    std::vector<double> target(t_len - m);
    for (int t = 0; t + m < t_len; ++t) target[t] = std::exp(-u * series[t + m]);
    return smoother.smooth(target, t_len - m, at, "nw_feld transform");
  };

  NwFeldResult result;
  result.h = h;
  result.u = u;
  result.y = y;
  result.bandwidth = bandwidth;
  result.terms.resize(h);

  for (int k = 0; k < h; ++k) {
    // Log ratio of fitted transforms one smoothing date apart, then smooth
    // that ratio back onto the conditioning state.
    const int limit = t_len - (k + 1);
    std::vector<double> ratio(limit);
    for (int t = 0; t < limit; ++t) {
      const double num = psi_hat(series[t + k], h - k);
      const double den = psi_hat(series[t + k + 1], h - k - 1);
      if (!(num > 0.0) || !(den > 0.0))
        throw std::runtime_error("nw_feld: fitted transform is not positive");
      ratio[t] = std::log(num) - std::log(den);
    }
    result.terms[k] = smoother.smooth(ratio, limit, y, "nw_feld term");
  }

  std::vector<double> lead(t_len - h);
  for (int t = 0; t + h < t_len; ++t) lead[t] = series[t + h];
  const double mean_h = smoother.smooth(lead, t_len - h, y, "nw_feld mean");
  result.total = u * mean_h + std::log(psi_hat(y, h));
  return result;
}

}  // namespace fred
