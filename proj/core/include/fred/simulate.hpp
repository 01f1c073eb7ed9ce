#pragma once

// Exact transition sampling for every model in the library, plus a small
// path container.  States travel as vectors: chains carry the state index
// in a length-1 vector, the matrix model flattens row-major.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fred/cauchy.hpp"
#include "fred/counts.hpp"
#include "fred/gaussian_var.hpp"
#include "fred/markov.hpp"
#include "fred/positive.hpp"
#include "fred/rng.hpp"
#include "fred/types.hpp"

namespace fred {

struct StochasticProcess {
  int dim = 0;
  std::string name;
  std::function<Vec(const Vec&, RngStream&)> step;
  std::function<Vec(RngStream&)> stationary;  // empty: approximate by burn-in
  Vec default_state;                          // starting point for burn-in
};

struct PathSet {
  int dim = 0;
  std::vector<Mat> paths;  // one (steps+1) x dim block per path; row 0 = start

  // Long format "path,t,component,value", one row per state component.
  std::string to_csv() const;
};

// n_paths independent paths started at y0.  Path i consumes only the RNG
// stream (seed, i), so the output is identical no matter how the paths are
// scheduled across workers.
PathSet simulate(const StochasticProcess& process, const Vec& y0, int steps,
                 int n_paths, std::uint64_t seed);

// Draw from the stationary law, exactly where one is wired up and through
// burn_in forward steps otherwise.
Vec stationary_draw(const StochasticProcess& process, RngStream& rng,
                    int burn_in = 1000);

StochasticProcess gauss_var_process(const GaussianVarModel& model);
StochasticProcess cauchy_process(const CauchyArModel& model);
StochasticProcess markov_process(const MarkovChain& chain);
StochasticProcess inar_process(const InarParams& params);
StochasticProcess nbar_process(const NbarParams& params);
StochasticProcess arg_process(const ArgParams& params);
StochasticProcess binbar_process(const BinbarParams& params);
StochasticProcess war_process(const WarParams& params);

}  // namespace fred
