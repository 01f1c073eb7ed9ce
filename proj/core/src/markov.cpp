#include "fred/markov.hpp"

#include <cmath>
#include <stdexcept>

#include "fred/gaussian_var.hpp"  // mat_power

namespace fred {

namespace {

void check_state(const MarkovChain& chain, int s, const char* what) {
  if (s < 0 || s >= chain.n())
    throw std::invalid_argument(std::string(what) + " index " + std::to_string(s) +
                                " outside 0.." + std::to_string(chain.n() - 1));
}

// Elementwise log of a row, refusing zero probabilities: the decomposition
// conditions on events of positive probability, and -inf terms would poison
// every downstream sum.
Vec log_row(const Eigen::RowVectorXd& row, const std::string& what) {
  Vec out(row.size());
  for (int j = 0; j < row.size(); ++j) {
    if (!(row[j] > 0.0))
      throw std::invalid_argument("log of nonpositive " + what + " entry " +
                                  std::to_string(j));
    out[j] = std::log(row[j]);
  }
  return out;
}

}  // namespace

MarkovChain make_markov_chain(const Mat& p) {
  if (p.rows() != p.cols() || p.rows() < 1)
    throw std::invalid_argument("markov: transition matrix must be square");
  if (p.minCoeff() < 0.0 || p.maxCoeff() > 1.0)
    throw std::invalid_argument("markov: entries must lie in [0,1]");
  for (int j = 0; j < p.cols(); ++j)
    if (std::abs(p.col(j).sum() - 1.0) > 1e-12)
      throw std::invalid_argument("markov: column " + std::to_string(j) +
                                  " sums to " + std::to_string(p.col(j).sum()) +
                                  " (columns must be stochastic)");
  return MarkovChain{p};
}

BinaryChainParams make_binary_chain(double pi, double lambda) {
  if (!(pi > 0.0 && pi < 1.0))
    throw std::invalid_argument("binary chain: pi must be in (0,1)");
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw std::invalid_argument("binary chain: lambda must be in [0,1)");
  for (const double y : {0.0, 1.0}) {
    const double p1 = pi + lambda * (y - pi);
    if (p1 < 0.0 || p1 > 1.0)
      throw std::invalid_argument("binary chain: transition probability " +
                                  std::to_string(p1) + " outside [0,1]");
  }
  return BinaryChainParams{pi, lambda};
}

MarkovChain binary_to_transition(const BinaryChainParams& params) {
  const double p_from0 = params.pi * (1.0 - params.lambda);
  const double p_from1 = params.pi + params.lambda * (1.0 - params.pi);
  Mat p(2, 2);
  p << 1.0 - p_from0, 1.0 - p_from1,
       p_from0, p_from1;
  return make_markov_chain(p);
}

double mc_transition_logprob(const MarkovChain& chain, int y, int x, int m) {
  check_state(chain, y, "state");
  check_state(chain, x, "state");
  if (m < 1) throw std::invalid_argument("mc_transition_logprob: m must be >= 1");
  const double prob = mat_power(chain.p, m)(y, x);
  if (!(prob > 0.0))
    throw std::invalid_argument("zero transition probability into state " +
                                std::to_string(y));
  return std::log(prob);
}

double mc_fekd_term(const MarkovChain& chain, int y, int x0, int h, int k) {
  check_state(chain, y, "evaluation state");
  check_state(chain, x0, "conditioning state");
  if (h < 2 || k < 0 || k > h - 2)
    throw std::invalid_argument("mc_fekd_term: need h >= 2 and 0 <= k <= h-2");
  const Mat p_hi = mat_power(chain.p, h - k);
  const Mat p_lo = mat_power(chain.p, h - k - 1);
  const Vec lg_hi = log_row(p_hi.row(y), "transition");
  const Vec lg_lo = log_row(p_lo.row(y), "transition");
  return lg_hi.dot(mat_power(chain.p, k).col(x0)) -
         lg_lo.dot(mat_power(chain.p, k + 1).col(x0));
}

double mc_fekd_total(const MarkovChain& chain, int y, int x0, int h) {
  check_state(chain, y, "evaluation state");
  check_state(chain, x0, "conditioning state");
  if (h < 1) throw std::invalid_argument("mc_fekd_total: h must be >= 1");
  if (h == 1) return 0.0;
  const Vec lg_one = log_row(chain.p.row(y), "transition");
  return mc_transition_logprob(chain, y, x0, h) -
         lg_one.dot(mat_power(chain.p, h - 1).col(x0));
}

DecompositionTable mc_fekd(const MarkovChain& chain, int y, int x0, int max_h) {
  std::map<std::pair<int, int>, double> terms;
  std::map<int, double> totals;
  for (int h = 1; h <= max_h; ++h) {
    totals[h] = mc_fekd_total(chain, y, x0, h);
    for (int k = 0; k <= h - 2; ++k)
      terms[{h, k}] = mc_fekd_term(chain, y, x0, h, k);
  }
  return assemble_table(Kind::fekd, terms, totals, scalar_vec(y), scalar_vec(x0));
}

double binary_fekd_term(const BinaryChainParams& params, int y0, int h, int k) {
  if (y0 != 0 && y0 != 1)
    throw std::invalid_argument("binary_fekd_term: state must be 0 or 1");
  if (h < 2 || k < 0 || k > h - 2)
    throw std::invalid_argument("binary_fekd_term: need h >= 2 and 0 <= k <= h-2");
  const double pi = params.pi, lam = params.lambda;
  if (!(lam > 0.0))
    throw std::invalid_argument("binary_fekd_term: closed form needs lambda > 0");
  const auto lam_pow = [lam](int m) { return std::pow(lam, m); };
  const double l_hi = lam_pow(h - k), l_lo = lam_pow(h - k - 1);
  return std::log((1.0 - l_hi) / (1.0 - l_lo)) +
         std::log((pi + l_hi * (1.0 - pi)) / (pi * (1.0 - l_hi))) *
             (pi + lam_pow(k) * (y0 - pi)) -
         std::log((pi + l_lo * (1.0 - pi)) / (pi * (1.0 - l_lo))) *
             (pi + lam_pow(k + 1) * (y0 - pi));
}

double mc_fevd_binary(const BinaryChainParams& params, int y0, int h, int k) {
  if (y0 != 0 && y0 != 1)
    throw std::invalid_argument("mc_fevd_binary: state must be 0 or 1");
  if (h < 1 || k < 0 || k > h - 1)
    throw std::invalid_argument("mc_fevd_binary: need h >= 1 and 0 <= k <= h-1");
  const double pi = params.pi, lam = params.lambda;
  return pi * (1.0 - pi) * std::pow(lam, 2 * (h - k - 1)) * (1.0 - lam * lam) +
         (y0 - pi) * (1.0 - 2.0 * pi) * std::pow(lam, 2 * h - k - 1) * (1.0 - lam);
}

DecompositionTable mc_fevd_binary_table(const BinaryChainParams& params, int y0,
                                        int max_h) {
  std::map<std::pair<int, int>, double> terms;
  std::map<int, double> totals;
  for (int h = 1; h <= max_h; ++h) {
    const double p_h = params.pi + std::pow(params.lambda, h) * (y0 - params.pi);
    totals[h] = p_h * (1.0 - p_h);
    for (int k = 0; k < h; ++k) terms[{h, k}] = mc_fevd_binary(params, y0, h, k);
  }
  return assemble_table(Kind::fevd, terms, totals, Vec(), scalar_vec(y0));
}

double mc_log_laplace(const MarkovChain& chain, const Vec& u, int x, int m) {
  check_state(chain, x, "conditioning state");
  if (u.size() != chain.n())
    throw std::invalid_argument("mc_log_laplace: argument length != state count");
  if (m < 0) throw std::invalid_argument("mc_log_laplace: m must be >= 0");
  if (m == 0) return -u[x];
  const Eigen::RowVectorXd z = (-u).array().exp().matrix().transpose();
  const double psi = z * mat_power(chain.p, m).col(x);
  if (!(psi > 0.0)) throw std::runtime_error("markov laplace transform underflow");
  return std::log(psi);
}

double mc_feld_term(const MarkovChain& chain, const Vec& u, int x0, int h, int k) {
  check_state(chain, x0, "conditioning state");
  if (u.size() != chain.n())
    throw std::invalid_argument("mc_feld_term: argument length != state count");
  if (h < 1 || k < 0 || k > h - 1)
    throw std::invalid_argument("mc_feld_term: need h >= 1 and 0 <= k <= h-1");
  const Eigen::RowVectorXd z = (-u).array().exp().matrix().transpose();
  const Eigen::RowVectorXd num = z * mat_power(chain.p, h - k);
  const Eigen::RowVectorXd den = z * mat_power(chain.p, h - k - 1);
  return log_row(num, "laplace").dot(mat_power(chain.p, k).col(x0)) -
         log_row(den, "laplace").dot(mat_power(chain.p, k + 1).col(x0));
}

double mc_feld_total(const MarkovChain& chain, const Vec& u, int x0, int h) {
  if (h < 1) throw std::invalid_argument("mc_feld_total: h must be >= 1");
  // u'E(X_{t+h}|x0) + log Ψ(u,h|x0)
  const Vec mean_h = mat_power(chain.p, h).col(x0);
  return u.dot(mean_h) + mc_log_laplace(chain, u, x0, h);
}

DecompositionTable mc_feld(const MarkovChain& chain, const Vec& u, int x0,
                           int max_h) {
  std::map<std::pair<int, int>, double> terms;
  std::map<int, double> totals;
  for (int h = 1; h <= max_h; ++h) {
    totals[h] = mc_feld_total(chain, u, x0, h);
    for (int k = 0; k < h; ++k) terms[{h, k}] = mc_feld_term(chain, u, x0, h, k);
  }
  return assemble_table(Kind::feld, terms, totals, u, scalar_vec(x0));
}

}  // namespace fred
