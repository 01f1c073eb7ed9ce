#pragma once

// Simulation-based estimates of decomposition terms and totals, used to
// validate the closed forms independently of how they were derived.  The
// estimates are exact in expectation: they only rely on the transition
// sampler and on the conditional functional at the horizons involved.

#include <cstdint>
#include <functional>

#include "fred/markov.hpp"
#include "fred/simulate.hpp"
#include "fred/types.hpp"

namespace fred {

// log E[Z | state, m steps before the target date].  For a Laplace target
// the m = 0 level is log Z itself; for a density target the innermost
// evaluable level is m = 1 (the one-step transition density).
using LogFunctional = std::function<double(int m, const Vec& state)>;

struct OracleProblem {
  StochasticProcess process;
  LogFunctional log_functional;
  int min_level = 0;
};

struct OracleEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long n_paths = 0;
  std::uint64_t seed = 0;
};

// Total at horizon h:  E[ logfun(h, y0) - logfun(min_level, S_{h-min_level}) ].
OracleEstimate fred_total_oracle(const OracleProblem& problem, const Vec& y0,
                                 int h, long n_paths, std::uint64_t seed);

// Term (h, k):  E[ logfun(h-k, S_k) - logfun(h-k-1, S_{k+1}) ]; needs
// h - k - 1 >= min_level.
OracleEstimate fred_term_oracle(const OracleProblem& problem, const Vec& y0,
                                int h, int k, long n_paths, std::uint64_t seed);

// Variance-side term (h, k) for a scalar projection of the state, via
//   E[ m_{k+1}^2 - m_k^2 ],  m_j = mean_functional(h - j, S_j),
// where mean_functional(r, s) is the r-step-ahead conditional mean at s.
OracleEstimate fevd_term_oracle(const StochasticProcess& process,
                                const std::function<double(int, const Vec&)>&
                                    mean_functional,
                                const Vec& y0, int h, int k, long n_paths,
                                std::uint64_t seed);

// Plain Monte Carlo mean of g(S_steps) from y0; handy for spot checks.
OracleEstimate mc_mean(const StochasticProcess& process, const Vec& y0,
                       int steps, const std::function<double(const Vec&)>& g,
                       long n_paths, std::uint64_t seed);

// Exact expectation of f(S_k, S_{k+1}) over all chain paths of length k+1
// started at x0.  The path count n^{k+1} must stay below 10^7.
double mc_path_expectation(const MarkovChain& chain, int x0, int k,
                           const std::function<double(int, int)>& f);

}  // namespace fred
