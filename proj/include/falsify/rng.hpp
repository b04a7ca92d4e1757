#pragma once

#include <cmath>
#include <cstdint>

namespace falsify {

// SplitMix64 stream generator. Chosen for the search layer because its
// output is fully specified by the algorithm below, so archives are
// reproducible across platforms and across reimplementations. One Rng
// instance per search run; the search consumes it in a fixed order
// (proposal dimensions in declaration order, then the acceptance draw
// when one is needed).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 bits of mantissa.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + next_double() * (hi - lo);
  }

  // Standard normal via Box-Muller, cosine branch only. Always consumes
  // exactly two raw draws, keeping the stream position predictable.
  double normal() {
    double u1 = 1.0 - next_double();  // (0, 1]
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

private:
  std::uint64_t state_;
};

}  // namespace falsify
