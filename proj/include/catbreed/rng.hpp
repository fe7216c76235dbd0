#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "catbreed/common.hpp"

namespace catbreed::detail {

// Explicit uniform/normal generation on top of mt19937_64; the standard
// library distributions are not bit-reproducible across implementations.
struct Rng {
  std::mt19937_64 eng;
  bool has_spare = false;
  double spare = 0.0;

  explicit Rng(uint64_t seed) : eng(seed) {}

  double uniform() {  // (0, 1)
    uint64_t r = eng();
    return ((r >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * kPi * u2;
    spare = r * std::sin(a);
    has_spare = true;
    return r * std::cos(a);
  }
};

}  // namespace catbreed::detail
