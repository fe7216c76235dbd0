#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace catbreed {

using cd = std::complex<double>;

// Quadrature length units. Internal units are those in which the vacuum
// Wigner function is exp(-(x^2+p^2))/pi (x-marginal variance 1/2).
// Homodyne units normalize the vacuum variance to 1, so lengths are a
// factor sqrt(2) larger than internal ones.
enum class Units { Internal, Homodyne };

inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct QuadratureConvention {
  double vacuum_x_variance = 0.5;
  double homodyne_unit_scale = std::sqrt(2.0);

  double to_internal(double len, Units u) const {
    return u == Units::Homodyne ? len / homodyne_unit_scale : len;
  }
  double from_internal(double len, Units u) const {
    return u == Units::Homodyne ? len * homodyne_unit_scale : len;
  }
};

inline double to_internal(double len, Units u) {
  return QuadratureConvention{}.to_internal(len, u);
}

inline Units parse_units(const std::string& s) {
  if (s == "internal") return Units::Internal;
  if (s == "homodyne") return Units::Homodyne;
  throw std::invalid_argument("unknown units: " + s);
}

inline const char* units_name(Units u) {
  return u == Units::Internal ? "internal" : "homodyne";
}

// Error taxonomy, mapped to distinct CLI exit codes.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AccuracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TruncationError : AccuracyError {
  using AccuracyError::AccuracyError;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// SplitMix64, used to derive independent per-chunk RNG seeds.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t index) {
  uint64_t s = base ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  splitmix64(s);
  return splitmix64(s);
}

}  // namespace catbreed
