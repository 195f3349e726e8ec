#include "polarcbo/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace polarcbo {

namespace {

// splitmix64 output function; decorrelates (master_seed, stream_id) pairs.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream) {
  const std::uint64_t golden = 0x9E3779B97F4A7C15ULL;
  return mix64(mix64(master + golden) ^ mix64((stream + 1) * golden));
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed),
      stream_id_(stream_id),
      engine_(derive_stream_seed(master_seed, stream_id)) {}

double RngStream::uniform01() {
  // 53 mantissa bits of one 64-bit word.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double RngStream::normal() {
  // u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

Vector RngStream::normal_vector(int d) {
  Vector v(d);
  for (int n = 0; n < d; ++n) v[n] = normal();
  return v;
}

Vector gaussian_increment(RngStream& rng, double dt, int d) {
  if (!(dt > 0.0)) throw std::invalid_argument("gaussian_increment: dt <= 0");
  if (d < 1) throw std::invalid_argument("gaussian_increment: d < 1");
  return std::sqrt(dt) * rng.normal_vector(d);
}

}  // namespace polarcbo
