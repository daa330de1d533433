#pragma once

#include <cstdint>
#include <random>

namespace sentilevy {

// Deterministic generator, identical across platforms and standard libraries.
// Tag: "mt19937_64-boxmuller-v1".
//   uniform: ((x >> 11) + 0.5) * 2^-53, strictly inside (0, 1)
//   normal:  Box-Muller, consumes exactly two uniforms per draw
//   poisson: Knuth product method, consumes a variable number of uniforms
// std::*_distribution is implementation-defined and deliberately avoided.
class Rng {
 public:
  static constexpr const char* kTag = "mt19937_64-boxmuller-v1";

  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {
    const std::uint64_t x = gen_();
    return (static_cast<double>(x >> 11) + 0.5) * 0x1p-53;
  }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  int poisson(double lambda) {
    if (!(lambda > 0.0)) return 0;
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 gen_;
};

}  // namespace sentilevy
