#pragma once

#include <complex>
#include <cstdint>

namespace qlat {

// Deterministic random generator built on the SplitMix64 mixing function:
// output i is a pure hash of (seed, stream, i), so identical (seed, stream,
// call sequence) reproduces identical values regardless of platform or
// standard library. Distributions are implemented here rather than with
// std::*_distribution, whose outputs are implementation defined.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0);

  uint64_t next_u64();

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform();
  double uniform(double lo, double hi);

  // Unbiased integer in [0, n); rejection sampling. n must be > 0.
  uint64_t below(uint64_t n);

  // Standard normal via the Marsaglia polar method; the paired variate is
  // cached and returned on the next call.
  double gaussian();

  // Standard complex normal CN(0,1): independent N(0, 1/2) parts.
  std::complex<double> complex_gaussian();

 private:
  uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qlat
