#include "uosf/rng.hpp"

#include <cmath>
#include <numbers>

namespace uosf {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(mix64(seed)), static_cast<std::uint32_t>(mix64(seed) >> 32),
                    static_cast<std::uint32_t>(mix64(stream ^ 0x5851f42d4c957f2dULL)),
                    static_cast<std::uint32_t>(mix64(stream ^ 0x5851f42d4c957f2dULL) >> 32)};
  engine_.seed(seq);
}

double Rng::exponential(double mean) { return -mean * std::log(1.0 - uniform()); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace uosf
