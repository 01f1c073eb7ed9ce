#include "fred/positive.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fred/gaussian_var.hpp"  // mat_power

namespace fred {

// ---------------------------------------------------------------------------
// ARG

ArgParams make_arg(double beta, double delta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("arg: persistence must be in (0,1)");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("arg: shape must be > 0");
  return ArgParams{beta, delta};
}

double arg_v(const ArgParams& params, int m) {
  if (m < 0) throw std::invalid_argument("arg_v: m must be >= 0");
  return (1.0 - std::pow(params.beta, m)) / (1.0 - params.beta);
}

AffineModel arg_affine(const ArgParams& params) {
  const double beta = params.beta, delta = params.delta;
  const double lower = -(1.0 - beta);  // boundary maps to itself under a
  auto a = [beta](const Vec& u) {
    return scalar_vec(beta * u[0] / (1.0 + u[0]));
  };
  auto c = [beta, delta](const Vec& u) {
    return -delta * std::log1p(u[0] / (1.0 - beta));
  };
  Mat grad_a0(1, 1);
  grad_a0 << beta;
  return make_affine(1, "arg", a, c, grad_a0,
                     scalar_vec(-delta / (1.0 - beta)),
                     [lower](const Vec& u) {
                       return std::isfinite(u[0]) && u[0] > lower;
                     });
}

double arg_feld_alpha(const ArgParams& params, double u, int h) {
  if (h < 1) throw std::invalid_argument("arg_feld_alpha: h must be >= 1");
  const double vh = arg_v(params, h);
  if (!(1.0 + vh * u > 0.0))
    throw std::invalid_argument("arg_feld_alpha: u outside the Laplace domain");
  return std::pow(params.beta, h) * u * (1.0 - 1.0 / (1.0 + vh * u));
}

double arg_feld_beta(const ArgParams& params, double u, int h) {
  if (h < 1) throw std::invalid_argument("arg_feld_beta: h must be >= 1");
  const double vh = arg_v(params, h);
  if (!(1.0 + vh * u > 0.0))
    throw std::invalid_argument("arg_feld_beta: u outside the Laplace domain");
  return params.delta * (vh * u - std::log1p(vh * u));
}

double arg_crossing(const ArgParams& params, int h) {
  if (h < 1) throw std::invalid_argument("arg_crossing: h must be >= 1");
  const double b = params.beta;
  const double bh = std::pow(b, h);
  return (1.0 - b) * (bh * b + bh - 1.0) / ((1.0 - bh) * (1.0 - bh * b));
}

DecompositionTable arg_feld(const ArgParams& params, double u, double y0,
                            int max_h) {
  if (!std::isfinite(u) || u < 0.0)
    throw std::invalid_argument("arg_feld: needs u >= 0");
  if (!std::isfinite(y0) || y0 < 0.0)
    throw std::invalid_argument("arg_feld: needs state >= 0");
  const double beta = params.beta, delta = params.delta;

  const auto v = [&](int m) { return arg_v(params, m); };
  const auto compound = [&](int m) {
    return std::pow(beta, m) * u / (1.0 + v(m) * u);
  };

  std::map<std::pair<int, int>, double> terms;
  std::map<int, double> totals;
  for (int h = 1; h <= max_h; ++h) {
    totals[h] =
        arg_feld_alpha(params, u, h) * y0 + arg_feld_beta(params, u, h);
    const double bh = std::pow(beta, h);
    for (int k = 0; k < h; ++k) {
      const double alpha = bh * u * (1.0 / (1.0 + v(h - k - 1) * u) -
                                     1.0 / (1.0 + v(h - k) * u));
      const double beta_term =
          -delta * (v(k) * compound(h - k) - v(k + 1) * compound(h - k - 1)) +
          delta * (std::log1p(v(h - k - 1) * u) - std::log1p(v(h - k) * u));
      terms[{h, k}] = alpha * y0 + beta_term;
    }
  }
  return assemble_table(Kind::feld, terms, totals, scalar_vec(u),
                        scalar_vec(y0));
}

// ---------------------------------------------------------------------------
// Matrix autoregression

namespace {

void require_symmetric(const Mat& m, const char* what) {
  if (m.rows() != m.cols())
    throw std::invalid_argument(std::string(what) + " must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument(std::string(what) + " must be symmetric");
}

// Square root of a symmetric PSD matrix; small negative eigenvalues from
// roundoff are clamped, genuinely negative ones are rejected.
Mat psd_sqrt(const Mat& m, const char* what) {
  require_symmetric(m, what);
  const Eigen::SelfAdjointEigenSolver<Mat> es(m);
  Vec ev = es.eigenvalues();
  const double tol = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] < -tol)
      throw std::invalid_argument(std::string(what) +
                                  " must be positive semi-definite");
    ev[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// Per-lag pieces of the Laplace transform at a fixed matrix argument:
// w[m] = Gamma (I + 2 Sigma_m Gamma)^{-1} (symmetric) and the log
// determinant of I + 2 Sigma_m Gamma, for m = 0..h.
struct WarKernel {
  std::vector<Mat> sigma;  // Sigma_m
  std::vector<Mat> w;
  std::vector<double> log_det;
};

WarKernel build_kernel(const WarParams& params, const Mat& gamma, int h) {
  const int n = static_cast<int>(params.m.rows());
  if (gamma.rows() != n || gamma.cols() != n)
    throw std::invalid_argument("war: matrix argument has the wrong order");
  const Mat root = psd_sqrt(gamma, "war: matrix argument");

  WarKernel kernel;
  kernel.sigma.resize(h + 1);
  kernel.w.resize(h + 1);
  kernel.log_det.resize(h + 1);
  kernel.sigma[0] = Mat::Zero(n, n);
  kernel.w[0] = gamma;
  kernel.log_det[0] = 0.0;
  for (int m = 1; m <= h; ++m) {
    kernel.sigma[m] =
        params.sigma + params.m * kernel.sigma[m - 1] * params.m.transpose();
    const Mat km =
        Mat::Identity(n, n) + 2.0 * root * kernel.sigma[m] * root;
    const Eigen::LLT<Mat> llt(km);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("war: Laplace kernel lost positive definiteness");
    kernel.w[m] = root * llt.solve(root);
    double ld = 0.0;
    const Mat l = llt.matrixL();
    for (int i = 0; i < n; ++i) ld += std::log(l(i, i));
    kernel.log_det[m] = 2.0 * ld;
  }
  return kernel;
}

double term_from_kernel(const WarParams& params, const WarKernel& kernel,
                        const Mat& y, int h, int k) {
  const Mat mh = mat_power(params.m, h);
  const Mat coef =
      mh.transpose() * (kernel.w[h - k - 1] - kernel.w[h - k]) * mh;
  const Mat g_lo = mat_power(params.m, h - k - 1).transpose() *
                   kernel.w[h - k - 1] * mat_power(params.m, h - k - 1);
  const Mat g_hi = mat_power(params.m, h - k).transpose() * kernel.w[h - k] *
                   mat_power(params.m, h - k);
  return (coef * y).trace() +
         params.k_dof * ((g_lo * kernel.sigma[k + 1]).trace() -
                         (g_hi * kernel.sigma[k]).trace()) +
         0.5 * params.k_dof * (kernel.log_det[h - k - 1] - kernel.log_det[h - k]);
}

}  // namespace

WarParams make_war(const Mat& m, const Mat& sigma, double k_dof) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw std::invalid_argument("war: mean-reversion matrix must be square");
  const double rho = m.eigenvalues().cwiseAbs().maxCoeff();
  if (rho >= 1.0)
    throw std::invalid_argument("war: spectral radius " + std::to_string(rho) +
                                " must be < 1");
  require_symmetric(sigma, "war: shock covariance");
  if (sigma.rows() != m.rows())
    throw std::invalid_argument("war: shock covariance order mismatch");
  if (Eigen::LLT<Mat>(sigma).info() != Eigen::Success)
    throw std::invalid_argument("war: shock covariance must be positive definite");
  if (!(k_dof > 0.0))
    throw std::invalid_argument("war: degrees of freedom must be > 0");
  return WarParams{m, sigma, k_dof};
}

Mat war_sigma_h(const WarParams& params, int h) {
  if (h < 0) throw std::invalid_argument("war_sigma_h: h must be >= 0");
  Mat out = Mat::Zero(params.m.rows(), params.m.cols());
  for (int m = 0; m < h; ++m)
    out = params.sigma + params.m * out * params.m.transpose();
  return out;
}

double war_log_laplace(const WarParams& params, const Mat& gamma, int h,
                       const Mat& y) {
  if (h < 0) throw std::invalid_argument("war_log_laplace: h must be >= 0");
  psd_sqrt(y, "war: state");  // validates symmetry and positivity
  const WarKernel kernel = build_kernel(params, gamma, h);
  const Mat mh = mat_power(params.m, h);
  return -(mh.transpose() * kernel.w[h] * mh * y).trace() -
         0.5 * params.k_dof * kernel.log_det[h];
}

Mat war_mean(const WarParams& params, const Mat& y, int h) {
  if (h < 0) throw std::invalid_argument("war_mean: h must be >= 0");
  const Mat mh = mat_power(params.m, h);
  return mh * y * mh.transpose() + params.k_dof * war_sigma_h(params, h);
}

Mat war_feld_state_coef(const WarParams& params, const Mat& gamma, int h,
                        int k) {
  if (h < 1 || k < 0 || k > h - 1)
    throw std::invalid_argument("war_feld_state_coef: need h >= 1 and 0 <= k <= h-1");
  const WarKernel kernel = build_kernel(params, gamma, h);
  const Mat mh = mat_power(params.m, h);
  Mat coef = mh.transpose() * (kernel.w[h - k - 1] - kernel.w[h - k]) * mh;
  return 0.5 * (coef + coef.transpose());
}

double war_feld_term(const WarParams& params, const Mat& gamma, const Mat& y,
                     int h, int k) {
  if (h < 1 || k < 0 || k > h - 1)
    throw std::invalid_argument("war_feld_term: need h >= 1 and 0 <= k <= h-1");
  psd_sqrt(y, "war: state");
  const WarKernel kernel = build_kernel(params, gamma, h);
  return term_from_kernel(params, kernel, y, h, k);
}

double war_feld_total(const WarParams& params, const Mat& gamma, const Mat& y,
                      int h) {
  if (h < 1) throw std::invalid_argument("war_feld_total: h must be >= 1");
  return (gamma * war_mean(params, y, h)).trace() +
         war_log_laplace(params, gamma, h, y);
}

DecompositionTable war_feld(const WarParams& params, const Mat& gamma,
                            const Mat& y, int max_h) {
  if (max_h < 1) throw std::invalid_argument("war_feld: max_h must be >= 1");
  psd_sqrt(y, "war: state");
  const int n = static_cast<int>(params.m.rows());
  const WarKernel kernel = build_kernel(params, gamma, max_h);

  std::map<std::pair<int, int>, double> terms;
  std::map<int, double> totals;
  for (int h = 1; h <= max_h; ++h) {
    const Mat mh = mat_power(params.m, h);
    totals[h] = (gamma * (mh * y * mh.transpose() +
                          params.k_dof * kernel.sigma[h]))
                    .trace() -
                (mh.transpose() * kernel.w[h] * mh * y).trace() -
                0.5 * params.k_dof * kernel.log_det[h];
    for (int k = 0; k < h; ++k)
      terms[{h, k}] = term_from_kernel(params, kernel, y, h, k);
  }

  const auto flatten = [n](const Mat& m) {
    Vec out(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] = m(i, j);
    return out;
  };
  return assemble_table(Kind::feld, terms, totals, flatten(gamma), flatten(y),
                        n);
}

}  // namespace fred
