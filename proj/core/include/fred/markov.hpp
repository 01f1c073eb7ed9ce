#pragma once

#include "fred/table.hpp"
#include "fred/types.hpp"

namespace fred {

// Finite-state chain with COLUMN-stochastic transition matrix:
// p(i,j) = P(state i at t+1 | state j at t), so E[X_{t+1}|X_t] = P X_t for
// the indicator encoding X_t. Note that this is the transpose of the more
// common row-stochastic convention.
struct MarkovChain {
  Mat p;

  int n() const { return static_cast<int>(p.rows()); }
};

MarkovChain make_markov_chain(const Mat& p);

// Two-state chain parameterized by the marginal probability π = P(Y=1) and
// persistence λ: P(Y_{t+1}=1|Y_t) = π + λ(Y_t - π).
struct BinaryChainParams {
  double pi = 0.5;
  double lambda = 0.0;
};

BinaryChainParams make_binary_chain(double pi, double lambda);

// Columns are (state 0, state 1); the h-step matrix is the same display with
// λ^h in place of λ.
MarkovChain binary_to_transition(const BinaryChainParams& params);

// Density-side update term at evaluation state y:
//   [log~(P^{h-k})_y P^k - log~(P^{h-k-1})_y P^{k+1}] X_t,
// where log~ is the elementwise log and (·)_y the y-th row. Every referenced
// transition probability must be positive.
double mc_fekd_term(const MarkovChain& chain, int y, int x0, int h, int k);

// Direct total: log p^(h)(y|x0) - Σ_j p^(h-1)(j|x0) log p(y|j).
double mc_fekd_total(const MarkovChain& chain, int y, int x0, int h);

DecompositionTable mc_fekd(const MarkovChain& chain, int y, int x0, int max_h);

// Closed form of the binary-chain update term for y = 1 (α(h,k) Y_t + β(h,k)
// shape); requires λ in (0,1) so the logs exist.
double binary_fekd_term(const BinaryChainParams& params, int y0, int h, int k);

// Variance-side update term for the binary chain,
//   π(1-π)λ^{2(h-k-1)}(1-λ²) + (Y_t-π)(1-2π)λ^{2h-k-1}(1-λ),
// whose sum over k = 0..h-1 is the Bernoulli conditional variance
// p_h(1-p_h), p_h = π + λ^h(Y_t-π).
double mc_fevd_binary(const BinaryChainParams& params, int y0, int h, int k);

DecompositionTable mc_fevd_binary_table(const BinaryChainParams& params, int y0,
                                        int max_h);

// Laplace-side update term with row vector z = exp(-u'):
//   [log~(z P^{h-k}) P^k - log~(z P^{h-k-1}) P^{k+1}] X_t,  k = 0..h-1
// (P^0 = Id covers the final update).
double mc_feld_term(const MarkovChain& chain, const Vec& u, int x0, int h, int k);

double mc_feld_total(const MarkovChain& chain, const Vec& u, int x0, int h);

DecompositionTable mc_feld(const MarkovChain& chain, const Vec& u, int x0,
                           int max_h);

// log of the m-step transition probability into state y from state x (m >= 1).
double mc_transition_logprob(const MarkovChain& chain, int y, int x, int m);

// log E[exp(-u'X_{t+m}) | X_t = x]; m = 0 gives -u_x.
double mc_log_laplace(const MarkovChain& chain, const Vec& u, int x, int m);

}  // namespace fred
