#pragma once

#include <cstdint>
#include <random>

namespace graphmcmc {

/// Seedable random stream with a fixed set of primitive draws.
///
/// All samplers in this library draw through this class so that a run is
/// reproducible from a single integer seed, independent of the standard
/// library's distribution implementations. Substreams derived via
/// `substream(id)` are decorrelated from the parent and from each other.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [a, b).
  double uniform(double a, double b);
  /// Standard normal via Box-Muller.
  double normal();
  /// Gamma(shape, scale=1) via Marsaglia-Tsang squeeze.
  double gamma(double shape);
  /// Uniform integer in {0, ..., n-1}; n >= 1.
  std::uint64_t uniform_int(std::uint64_t n);
  bool bernoulli(double p);
  /// Poisson(lambda); inversion for small lambda, PTRS rejection otherwise.
  std::uint64_t poisson(double lambda);

  /// Independent stream derived from this stream's seed and `id`.
  Rng substream(std::uint64_t id) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

/// SplitMix64 finalizer; used to spread user seeds and derive substreams.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace graphmcmc
