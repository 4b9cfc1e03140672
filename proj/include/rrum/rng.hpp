#ifndef RRUM_RNG_HPP
#define RRUM_RNG_HPP

#include <cstdint>
#include <random>

namespace rrum {

/// Seeded generator used throughout the library. All variates are produced
/// by explicit inverse transforms on top of mt19937_64, so a fixed seed
/// yields the same stream on every platform.
///
/// Independent substreams are derived from (seed, stream id) with a
/// splitmix64 mix, e.g. the simulator draws attributes from substream 0 and
/// responses from substream 1 so each half is reproducible on its own.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Generator seeded from (this seed, stream_id); independent of the
  /// parent's draw position.
  Rng substream(std::uint64_t stream_id) const;

  std::uint64_t seed() const { return seed_; }

  /// Uniform on the open interval (0,1); never returns 0 or 1.
  double uniform01();

  /// Uniform on (lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via quantile inverse transform.
  double normal();

  /// Gamma(shape, scale 1) for shape >= 1 (Marsaglia-Tsang squeeze).
  double gamma(double shape);

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer-based mixing of a seed with stream labels.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace rrum

#endif  // RRUM_RNG_HPP
