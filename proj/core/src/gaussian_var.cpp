#include "fred/gaussian_var.hpp"

#include <cmath>
#include <stdexcept>

namespace fred {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::LLT<Mat> pd_factor(const Mat& m, const std::string& what) {
  const Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(what + " is not positive definite");
  return llt;
}

double log_det_from_llt(const Eigen::LLT<Mat>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

Mat mat_power(const Mat& m, int p) {
  if (p < 0) throw std::invalid_argument("mat_power: negative power");
  Mat out = Mat::Identity(m.rows(), m.cols());
  for (int i = 0; i < p; ++i) out = out * m;
  return out;
}

GaussianVarModel make_gaussian_var(const Mat& phi, const Mat& sigma) {
  if (phi.rows() != phi.cols() || sigma.rows() != sigma.cols() ||
      phi.rows() != sigma.rows())
    throw std::invalid_argument("gauss-var: phi and sigma must be square with equal size");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("gauss-var: sigma must be symmetric");
  const Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("gauss-var: sigma must be positive definite");
  const double rho = phi.eigenvalues().cwiseAbs().maxCoeff();
  if (rho >= 1.0)
    throw std::invalid_argument("gauss-var: spectral radius of phi is " +
                                std::to_string(rho) + ", needs < 1");
  return GaussianVarModel{phi, sigma};
}

Mat sigma_h(const GaussianVarModel& model, int h) {
  if (h < 1) throw std::invalid_argument("sigma_h: h must be >= 1");
  Mat s = model.sigma;
  for (int m = 2; m <= h; ++m) s = model.sigma + model.phi * s * model.phi.transpose();
  return s;
}

std::vector<Mat> var_fevd(const GaussianVarModel& model, int h) {
  if (h < 1) throw std::invalid_argument("var_fevd: h must be >= 1");
  std::vector<Mat> terms;
  terms.reserve(h);
  for (int k = 0; k < h; ++k) {
    const Mat p = mat_power(model.phi, h - k - 1);
    terms.push_back(p * model.sigma * p.transpose());
  }
  return terms;
}

VarFekdCoefficients var_fekd_coefficients(const GaussianVarModel& model,
                                          const Vec& y0, int h, int k) {
  if (h < 2) throw std::invalid_argument("var_fekd: h must be >= 2");
  if (k < 0 || k > h - 2)
    throw std::invalid_argument("var_fekd: k must lie in 0..h-2");

  const Mat s_lo = sigma_h(model, h - k - 1);
  const Mat s_hi = sigma_h(model, h - k);
  const auto llt_lo = pd_factor(s_lo, "sigma_{h-k-1}");
  const auto llt_hi = pd_factor(s_hi, "sigma_{h-k}");
  const Mat inv_lo = llt_lo.solve(Mat::Identity(model.dim(), model.dim()));
  const Mat inv_hi = llt_hi.solve(Mat::Identity(model.dim(), model.dim()));
  const Mat d = inv_hi - inv_lo;

  const Mat p_lo = mat_power(model.phi, h - k - 1);
  const Mat p_hi = mat_power(model.phi, h - k);
  const Mat s_k = k == 0 ? Mat::Zero(model.dim(), model.dim()) : sigma_h(model, k);
  const Mat s_k1 = sigma_h(model, k + 1);
  const Vec mu = mat_power(model.phi, h) * y0;

  VarFekdCoefficients coef;
  coef.a = 0.5 * (log_det_from_llt(llt_lo) - log_det_from_llt(llt_hi)) +
           0.5 * (inv_lo * p_lo * s_k1 * p_lo.transpose() -
                  inv_hi * p_hi * s_k * p_hi.transpose())
                     .trace() -
           0.5 * mu.dot(d * mu);
  coef.b = d * mu;
  coef.c = -0.5 * d;
  return coef;
}

double var_fekd_total(const GaussianVarModel& model, const Vec& y,
                      const Vec& y0, int h) {
  if (h < 1) throw std::invalid_argument("var_fekd_total: h must be >= 1");
  if (h == 1) return 0.0;
  const Mat s_h = sigma_h(model, h);
  const auto llt_h = pd_factor(s_h, "sigma_h");
  const auto llt_1 = pd_factor(model.sigma, "sigma");
  const Vec d = y - mat_power(model.phi, h) * y0;
  return 0.5 * (log_det_from_llt(llt_1) - log_det_from_llt(llt_h)) -
         0.5 * d.dot(llt_h.solve(d)) + 0.5 * d.dot(llt_1.solve(d)) +
         0.5 * llt_1.solve(model.phi * sigma_h(model, h - 1) * model.phi.transpose())
                   .trace();
}

DecompositionTable var_fekd(const GaussianVarModel& model, const Vec& y,
                            const Vec& y0, int max_h) {
  std::map<std::pair<int, int>, double> terms;
  std::map<int, double> totals;
  for (int h = 1; h <= max_h; ++h) {
    totals[h] = var_fekd_total(model, y, y0, h);
    for (int k = 0; k <= h - 2; ++k)
      terms[{h, k}] = var_fekd_coefficients(model, y0, h, k).value(y);
  }
  return assemble_table(Kind::fekd, terms, totals, y, y0);
}

DecompositionTable var_feld(const GaussianVarModel& model, const Vec& u, int max_h) {
  std::map<std::pair<int, int>, double> terms;
  std::map<int, double> totals;
  const Mat phi_t = model.phi.transpose();
  for (int h = 1; h <= max_h; ++h) {
    totals[h] = 0.5 * u.dot(sigma_h(model, h) * u);
    for (int k = 0; k < h; ++k) {
      // The update at t+k+1 reaches t+h through h-k-1 more transitions.
      const Vec v = mat_power(phi_t, h - k - 1) * u;
      terms[{h, k}] = 0.5 * v.dot(model.sigma * v);
    }
  }
  return assemble_table(Kind::feld, terms, totals, u, Vec::Zero(model.dim()));
}

double mahalanobis(const GaussianVarModel& model, const Vec& y, const Vec& y0,
                   int h) {
  const Vec d = y - mat_power(model.phi, h) * y0;
  const auto llt = pd_factor(sigma_h(model, h), "sigma_h");
  return std::sqrt(d.dot(llt.solve(d)));
}

AffineModel gaussian_var_affine(const GaussianVarModel& model) {
  const Mat phi_t = model.phi.transpose();
  const Mat sigma = model.sigma;
  auto a = [phi_t](const Vec& u) -> Vec { return phi_t * u; };
  auto b = [sigma](const Vec& u) { return 0.5 * u.dot(sigma * u); };
  return make_affine_from_b(model.dim(), "gauss-var", a, b, model.phi);
}

double var_transition_logpdf(const GaussianVarModel& model, const Vec& y,
                             const Vec& y0, int h) {
  if (h < 1) throw std::invalid_argument("var_transition_logpdf: h must be >= 1");
  const auto llt = pd_factor(sigma_h(model, h), "sigma_h");
  const Vec d = y - mat_power(model.phi, h) * y0;
  return -0.5 * model.dim() * std::log(2.0 * kPi) - 0.5 * log_det_from_llt(llt) -
         0.5 * d.dot(llt.solve(d));
}

}  // namespace fred
