#include "fred/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fred {

namespace {

// Streaming mean and standard error over per-path samples.
class Accumulator {
 public:
  void add(double x, long path) {
    if (!std::isfinite(x))
      throw std::runtime_error("oracle sample diverged on path " +
                               std::to_string(path));
    ++n_;
    const double d = x - mean_;
    mean_ += d / n_;
    m2_ += d * (x - mean_);
  }

  OracleEstimate finish(std::uint64_t seed) const {
    if (n_ < 2) throw std::invalid_argument("oracle needs at least two paths");
    OracleEstimate est;
    est.value = mean_;
    est.std_error = std::sqrt(m2_ / (static_cast<double>(n_) * (n_ - 1)));
    est.n_paths = n_;
    est.seed = seed;
    return est;
  }

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace

OracleEstimate fred_total_oracle(const OracleProblem& problem, const Vec& y0,
                                 int h, long n_paths, std::uint64_t seed) {
  if (h < 1) throw std::invalid_argument("fred_total_oracle: h must be >= 1");
  const int steps = h - problem.min_level;
  if (steps < 0)
    throw std::invalid_argument("fred_total_oracle: horizon below the innermost level");
  const double outer = problem.log_functional(h, y0);

  Accumulator acc;
  for (long i = 0; i < n_paths; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    Vec state = y0;
    for (int t = 0; t < steps; ++t) state = problem.process.step(state, rng);
    acc.add(outer - problem.log_functional(problem.min_level, state), i);
  }
  return acc.finish(seed);
}

OracleEstimate fred_term_oracle(const OracleProblem& problem, const Vec& y0,
                                int h, int k, long n_paths, std::uint64_t seed) {
  if (h < 1 || k < 0)
    throw std::invalid_argument("fred_term_oracle: need h >= 1 and k >= 0");
  if (h - k - 1 < problem.min_level)
    throw std::invalid_argument("fred_term_oracle: k too large for this target");

  Accumulator acc;
  for (long i = 0; i < n_paths; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    Vec state = y0;
    for (int t = 0; t < k; ++t) state = problem.process.step(state, rng);
    const double at_k = problem.log_functional(h - k, state);
    state = problem.process.step(state, rng);
    acc.add(at_k - problem.log_functional(h - k - 1, state), i);
  }
  return acc.finish(seed);
}

OracleEstimate fevd_term_oracle(const StochasticProcess& process,
                                const std::function<double(int, const Vec&)>&
                                    mean_functional,
                                const Vec& y0, int h, int k, long n_paths,
                                std::uint64_t seed) {
  if (h < 1 || k < 0 || k > h - 1)
    throw std::invalid_argument("fevd_term_oracle: need h >= 1 and 0 <= k <= h-1");

  Accumulator acc;
  for (long i = 0; i < n_paths; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    Vec state = y0;
    for (int t = 0; t < k; ++t) state = process.step(state, rng);
    const double m_outer = mean_functional(h - k, state);
    state = process.step(state, rng);
    const double m_inner = mean_functional(h - k - 1, state);
    // V[m_inner | I_{t+k}] = E[m_inner^2] - m_outer^2 by the tower property.
    acc.add(m_inner * m_inner - m_outer * m_outer, i);
  }
  return acc.finish(seed);
}

OracleEstimate mc_mean(const StochasticProcess& process, const Vec& y0,
                       int steps, const std::function<double(const Vec&)>& g,
                       long n_paths, std::uint64_t seed) {
  if (steps < 0) throw std::invalid_argument("mc_mean: steps must be >= 0");
  Accumulator acc;
  for (long i = 0; i < n_paths; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    Vec state = y0;
    for (int t = 0; t < steps; ++t) state = process.step(state, rng);
    acc.add(g(state), i);
  }
  return acc.finish(seed);
}

double mc_path_expectation(const MarkovChain& chain, int x0, int k,
                           const std::function<double(int, int)>& f) {
  const int n = chain.n();
  if (x0 < 0 || x0 >= n)
    throw std::invalid_argument("mc_path_expectation: bad starting state");
  if (k < 0) throw std::invalid_argument("mc_path_expectation: k must be >= 0");
  double count = std::pow(static_cast<double>(n), k + 1);
  if (count > 1e7)
    throw std::invalid_argument("mc_path_expectation: path space too large");

  std::vector<int> path(k + 1, 0);  // states at times 1..k+1
  double total = 0.0;
  for (;;) {
    double prob = chain.p(path[0], x0);
    for (int t = 1; t <= k; ++t) prob *= chain.p(path[t], path[t - 1]);
    const int s_k = k == 0 ? x0 : path[k - 1];
    total += prob * f(s_k, path[k]);

    // Odometer over the path space.
    int pos = 0;
    while (pos <= k && ++path[pos] == n) path[pos++] = 0;
    if (pos > k) break;
  }
  return total;
}

}  // namespace fred
