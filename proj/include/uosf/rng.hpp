#pragma once

#include <cstdint>
#include <random>

namespace uosf {

// Seeded random stream. Streams are keyed by (seed, stream id) so that, e.g.,
// Monte Carlo trial i always sees the same draws no matter which worker runs
// it or how many workers there are.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Exponential with the given mean by inversion: -mean * ln(U), U in (0, 1].
  double exponential(double mean);

  // Standard normal (Box-Muller).
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// SplitMix64 finalizer, used to derive stream keys.
std::uint64_t mix64(std::uint64_t x);

}  // namespace uosf
