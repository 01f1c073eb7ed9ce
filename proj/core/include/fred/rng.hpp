#pragma once

#include <cstdint>
#include <random>

namespace fred {

// Deterministic random stream keyed by (seed, stream index). Simulation code
// derives one stream per sample path, so results do not depend on how paths
// are scheduled across workers.
//
// All variate transforms are hand-rolled on top of the raw 64-bit output:
// std::<distribution> implementations differ between standard libraries, and
// reproducibility across platforms is part of the simulation contract.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  double uniform();  // U[0,1), 53-bit resolution
  double normal();   // N(0,1), Box-Muller
  double exponential();
  double cauchy(double location, double scale);
  double gamma(double shape);  // unit scale, Marsaglia-Tsang
  long poisson(double mean);
  long binomial(long n, double p);

 private:
  double positive_uniform();  // U(0,1), rejects exact zeros
  std::mt19937_64 eng_;
};

}  // namespace fred
