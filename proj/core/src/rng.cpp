#include "fred/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace fred {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
  // Run both keys through splitmix so that (seed, stream) pairs that differ
  // in only a few bits still land far apart in the mt19937_64 state space.
  std::uint64_t s = seed;
  const std::uint64_t a = splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ULL * (stream + 0x51afd7ed558ccd6dULL);
  const std::uint64_t b = splitmix64(s);
  eng_.seed(a ^ (b + 0x63652362d1034e45ULL));
}

std::uint64_t RngStream::next_u64() { return eng_(); }

double RngStream::uniform() {
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double RngStream::positive_uniform() {
  double u = uniform();
  while (u == 0.0) u = uniform();
  return u;
}

double RngStream::normal() {
  const double u1 = positive_uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double RngStream::exponential() { return -std::log(positive_uniform()); }

double RngStream::cauchy(double location, double scale) {
  return location + scale * std::tan(kPi * (uniform() - 0.5));
}

double RngStream::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
  if (shape < 1.0) {
    // Boost the shape above 1 and correct with a uniform power.
    return gamma(shape + 1.0) * std::pow(positive_uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = positive_uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

long RngStream::poisson(double mean) {
  if (mean < 0.0) throw std::invalid_argument("poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  // Knuth's multiplicative method is exact but underflows for large means;
  // split using Poisson additivity before that happens.
  if (mean > 60.0) return poisson(mean * 0.5) + poisson(mean - mean * 0.5);
  const double limit = std::exp(-mean);
  long k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform();
  } while (p > limit);
  return k - 1;
}

long RngStream::binomial(long n, double p) {
  if (n < 0) throw std::invalid_argument("binomial: n must be >= 0");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("binomial: p must be in [0,1]");
  long count = 0;
  for (long i = 0; i < n; ++i)
    if (uniform() < p) ++count;
  return count;
}

}  // namespace fred
