#ifndef POLARCBO_RNG_HPP
#define POLARCBO_RNG_HPP

#include <cstdint>
#include <random>

#include "polarcbo/numeric.hpp"

namespace polarcbo {

// Reserved stream ids, kept far above any particle index so per-particle
// streams (id = particle index) never collide with bookkeeping streams.
inline constexpr std::uint64_t kPositionInitStream = 0x1'0000'0000ULL;
inline constexpr std::uint64_t kClusterInitStream = 0x1'0000'0001ULL;
inline constexpr std::uint64_t kDiagnosticsStream = 0x1'0000'0002ULL;

/// One independent, reproducible random substream addressed by
/// (master_seed, stream_id). Streams are derived by hashing the pair, so
/// constructing stream k never requires advancing streams 0..k-1 and
/// per-particle stepping is order-independent.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform double in [0, 1).
  double uniform01();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller (two uniforms per draw, no cached
  /// second value, so the consumed engine state per call is fixed).
  double normal();

  Vector normal_vector(int d);

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// One draw of N(0, dt * I_d) from the given substream.
Vector gaussian_increment(RngStream& rng, double dt, int d);

}  // namespace polarcbo

#endif
