#include "fred/affine.hpp"

#include <cmath>
#include <stdexcept>

namespace fred {

namespace {

double spectral_radius(const Mat& m) {
  return m.eigenvalues().cwiseAbs().maxCoeff();
}

Mat mat_power(const Mat& m, int p) {
  Mat out = Mat::Identity(m.rows(), m.cols());
  for (int i = 0; i < p; ++i) out = out * m;
  return out;
}

// Central-difference Jacobian of a at 0, arranged as da'/du so that it is
// directly comparable with grad_a0.
Mat fd_grad_a0(const AffineModel& model) {
  const double step = 1e-5;
  Mat out(model.dim, model.dim);
  for (int i = 0; i < model.dim; ++i) {
    Vec up = Vec::Zero(model.dim), dn = Vec::Zero(model.dim);
    up[i] = step;
    dn[i] = -step;
    out.row(i) = ((model.a(up) - model.a(dn)) / (2.0 * step)).transpose();
  }
  return out;
}

void validate(const AffineModel& model) {
  const Vec zero = Vec::Zero(model.dim);
  if (model.a(zero).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument(model.name + ": a(0) != 0");
  if (std::abs(model.c(zero)) > 1e-12)
    throw std::invalid_argument(model.name + ": c(0) != 0");
  const double rho = spectral_radius(model.grad_a0);
  if (rho >= 1.0)
    throw std::invalid_argument(model.name + ": spectral radius of grad_a0 is " +
                                std::to_string(rho) + ", needs < 1");
  const Mat fd = fd_grad_a0(model);
  if ((fd - model.grad_a0).cwiseAbs().maxCoeff() > 1e-6)
    throw std::invalid_argument(model.name +
                                ": grad_a0 disagrees with finite differences of a");
}

}  // namespace

AffineModel make_affine(int dim, std::string name,
                        std::function<Vec(const Vec&)> a,
                        std::function<double(const Vec&)> c,
                        const Mat& grad_a0, const Vec& grad_c0,
                        std::function<bool(const Vec&)> domain) {
  AffineModel model;
  model.dim = dim;
  model.name = std::move(name);
  model.a = std::move(a);
  model.c = std::move(c);
  model.grad_a0 = grad_a0;
  model.grad_c0 = grad_c0;
  model.domain = std::move(domain);
  validate(model);
  return model;
}

AffineModel make_affine_from_b(int dim, std::string name,
                               std::function<Vec(const Vec&)> a,
                               std::function<double(const Vec&)> b,
                               const Mat& grad_a0,
                               std::function<bool(const Vec&)> domain) {
  // c(u) = Σ_j b(a∘j(u)); the iterates a∘j(u) -> 0 geometrically under the
  // stationarity bound, so the series terminates quickly in practice.
  auto c = [a, b](const Vec& u) {
    double total = 0.0;
    Vec v = u;
    for (int j = 0; j < 100000; ++j) {
      const double inc = b(v);
      total += inc;
      // The iterate can stall one ulp above zero, so the increment cutoff is
      // relative to the accumulated value rather than a hard 1e-16.
      if (std::abs(inc) < 1e-15 * std::max(1.0, std::abs(total)) &&
          v.cwiseAbs().maxCoeff() < 1e-12)
        return total;
      v = a(v);
    }
    throw std::runtime_error("c(u) series did not converge in 1e5 compositions");
  };

  // grad_c0 solves grad_c0 = grad_b0 + grad_a0 grad_c0 (chain rule at 0).
  const double step = 1e-6;
  Vec grad_b0(dim);
  for (int i = 0; i < dim; ++i) {
    Vec up = Vec::Zero(dim), dn = Vec::Zero(dim);
    up[i] = step;
    dn[i] = -step;
    grad_b0[i] = (b(up) - b(dn)) / (2.0 * step);
  }
  const Vec grad_c0 =
      (Mat::Identity(dim, dim) - grad_a0).partialPivLu().solve(grad_b0);

  return make_affine(dim, std::move(name), std::move(a), std::move(c), grad_a0,
                     grad_c0, std::move(domain));
}

Vec compound_a(const AffineModel& model, const Vec& u, int h) {
  if (h < 0) throw std::invalid_argument("compound_a: h must be >= 0");
  if (!model.in_domain(u))
    throw std::invalid_argument(model.name + ": argument outside the Laplace domain");
  Vec v = u;
  for (int j = 1; j <= h; ++j) {
    v = model.a(v);
    if (!v.allFinite() || !model.in_domain(v))
      throw std::invalid_argument(model.name + ": a∘" + std::to_string(j) +
                                  "(u) left the Laplace domain");
  }
  return v;
}

double conditional_log_laplace(const AffineModel& model, const Vec& u, int h,
                               const Vec& y) {
  if (h < 1) throw std::invalid_argument("conditional_log_laplace: h must be >= 1");
  const Vec ah = compound_a(model, u, h);
  return -ah.dot(y) + model.c(u) - model.c(ah);
}

Vec conditional_mean(const AffineModel& model, const Vec& y, int h) {
  if (h < 0) throw std::invalid_argument("conditional_mean: h must be >= 0");
  return -model.grad_c0 + mat_power(model.grad_a0, h) * (y + model.grad_c0);
}

FeldComponents feld_components(const AffineModel& model, const Vec& u, int h) {
  if (h < 1) throw std::invalid_argument("feld_components: h must be >= 1");

  if (!model.in_domain(u))
    throw std::invalid_argument(model.name + ": argument outside the Laplace domain");
  std::vector<Vec> ac(h + 1);  // a∘m(u)
  ac[0] = u;
  for (int m = 1; m <= h; ++m) {
    ac[m] = model.a(ac[m - 1]);
    if (!ac[m].allFinite() || !model.in_domain(ac[m]))
      throw std::invalid_argument(model.name + ": a∘" + std::to_string(m) +
                                  "(u) left the Laplace domain");
  }

  std::vector<Mat> ap(h + 1);  // grad_a0^m
  ap[0] = Mat::Identity(model.dim, model.dim);
  for (int m = 1; m <= h; ++m) ap[m] = ap[m - 1] * model.grad_a0;

  std::vector<double> cv(h + 1);  // c(a∘m(u))
  for (int m = 0; m <= h; ++m) cv[m] = model.c(ac[m]);

  const Vec& gc = model.grad_c0;

  FeldComponents out;
  out.alpha_total = ap[h].transpose() * u - ac[h];
  out.beta_total = -u.dot(gc) + u.dot(ap[h] * gc) + cv[0] - cv[h];

  out.alpha_terms.reserve(h);
  out.beta_terms.reserve(h);
  for (int k = 0; k < h; ++k) {
    const Vec& lo = ac[h - k - 1];  // a∘(h-k-1)(u)
    const Vec& hi = ac[h - k];      // a∘(h-k)(u)
    out.alpha_terms.push_back(ap[k + 1].transpose() * lo - ap[k].transpose() * hi);
    out.beta_terms.push_back((hi - lo).dot(gc) +
                             (lo.transpose() * ap[k + 1] - hi.transpose() * ap[k])
                                     .dot(gc) +
                             cv[h - k - 1] - cv[h - k]);
  }
  return out;
}

DecompositionTable feld_table(const AffineModel& model, const Vec& u,
                              const Vec& y, int max_h) {
  std::map<std::pair<int, int>, double> terms;
  std::map<int, double> totals;
  for (int h = 1; h <= max_h; ++h) {
    const FeldComponents comp = feld_components(model, u, h);
    totals[h] = comp.alpha_total.dot(y) + comp.beta_total;
    for (int k = 0; k < h; ++k)
      terms[{h, k}] = comp.alpha_terms[k].dot(y) + comp.beta_terms[k];
  }
  return assemble_table(Kind::feld, terms, totals, u, y);
}

namespace {

// Hessian of a scalar function at x by central differences.
Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x,
               double step) {
  const int n = static_cast<int>(x.size());
  Mat hess(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Vec pp = x, pm = x, mp = x, mm = x;
      pp[i] += step; pp[j] += step;
      pm[i] += step; pm[j] -= step;
      mp[i] -= step; mp[j] += step;
      mm[i] -= step; mm[j] -= step;
      hess(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step * step);
      hess(j, i) = hess(i, j);
    }
  }
  return hess;
}

// One-step conditional variance V(Y_{t+1}|Y_t = y), affine in y:
// the Hessian at 0 of u -> -a(u)'y + b(u) (the one-step cumulant transform
// in -u, whose second derivative is the variance).
Mat one_step_variance(const AffineModel& model, const Vec& y) {
  const double step = 1e-4;
  auto f = [&](const Vec& u) {
    const Vec au = model.a(u);
    return -au.dot(y) + model.c(u) - model.c(au);
  };
  return fd_hessian(f, Vec::Zero(model.dim), step);
}

void check_psd(const Mat& m, const std::string& what) {
  const Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
  if (es.eigenvalues().minCoeff() < -1e-8)
    throw std::runtime_error(what + " is not positive semi-definite (min eigenvalue " +
                             std::to_string(es.eigenvalues().minCoeff()) + ")");
}

}  // namespace

Mat fevd_affine_term(const AffineModel& model, const Vec& y0, int h, int k) {
  if (h < 1 || k < 0 || k > h - 1)
    throw std::invalid_argument("fevd_affine_term: need h >= 1 and 0 <= k <= h-1");
  // V[E(Y_{t+h}|I_{t+k+1})|I_{t+k}] = A^{h-k-1} V(Y_{t+k+1}|Y_{t+k}) (A^{h-k-1})'
  // and the outer expectation replaces the state by its k-step mean, because
  // the one-step variance is affine in the state.
  const Vec mean_k = conditional_mean(model, y0, k);
  const Mat inner = one_step_variance(model, mean_k);
  const Mat apow = mat_power(model.grad_a0, h - k - 1);
  Mat term = apow * inner * apow.transpose();
  term = 0.5 * (term + term.transpose());
  check_psd(term, "FEVD term (h=" + std::to_string(h) + ", k=" + std::to_string(k) + ")");
  return term;
}

Mat fevd_affine_total(const AffineModel& model, const Vec& y0, int h) {
  if (h < 1) throw std::invalid_argument("fevd_affine_total: h must be >= 1");
  const double step = 1e-4;
  auto f = [&](const Vec& u) {
    Vec v = u;
    for (int m = 0; m < h; ++m) v = model.a(v);
    return -v.dot(y0) + model.c(u) - model.c(v);
  };
  Mat total = fd_hessian(f, Vec::Zero(model.dim), step);
  total = 0.5 * (total + total.transpose());
  check_psd(total, "FEVD total (h=" + std::to_string(h) + ")");
  return total;
}

RiskPremiumDecomposition risk_premium_decomposition(const AffineModel& model,
                                                    double u, double y0,
                                                    int max_h) {
  if (model.dim != 1)
    throw std::invalid_argument("risk premium decomposition is univariate only");
  if (!(u > 0.0))
    throw std::invalid_argument("risk premium decomposition needs u > 0");

  const Vec uv = scalar_vec(u);
  const Vec yv = scalar_vec(y0);
  RiskPremiumDecomposition out;
  for (int h = 1; h <= max_h; ++h) {
    const double log_psi = conditional_log_laplace(model, uv, h, yv);
    const double pi = -log_psi / u;
    const FeldComponents comp = feld_components(model, uv, h);
    const double gamma_h = comp.alpha_total.dot(yv) + comp.beta_total;
    out.certainty_equivalent.push_back(pi);
    out.premium.push_back(gamma_h / u);
    std::vector<double> per_k(h);
    for (int k = 0; k < h; ++k)
      per_k[k] = (comp.alpha_terms[k].dot(yv) + comp.beta_terms[k]) / u;
    out.premium_terms.push_back(std::move(per_k));
  }
  return out;
}

}  // namespace fred
