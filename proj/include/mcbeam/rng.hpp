#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace mcbeam::rng {

// SplitMix64 output function.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum class Purpose : std::uint64_t {
  Geometry = 1,
  Channel = 2,
  Synthetic = 3,
};

// Counter-based stream keyed by (seed, purpose, i, j); draw order never
// depends on loop scheduling, so results are reproducible under any
// concurrency level.
class Stream {
 public:
  Stream(std::uint64_t seed, Purpose purpose, std::uint64_t i = 0, std::uint64_t j = 0) {
    s_ = mix64(seed + 0x9e3779b97f4a7c15ULL);
    s_ = mix64(s_ ^ (0xa0761d6478bd642fULL * (static_cast<std::uint64_t>(purpose) + 1)));
    s_ = mix64(s_ ^ (0xe7037ed1a0b428dbULL * (i + 1)));
    s_ = mix64(s_ ^ (0x8ebc6af09c88c6e3ULL * (j + 1)));
  }

  std::uint64_t next_u64() {
    s_ += 0x9e3779b97f4a7c15ULL;
    return mix64(s_);
  }

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; explicit so streams are portable across
  // standard libraries.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0,1], keeps log finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Circularly-symmetric complex normal, unit variance.
  std::complex<double> cnormal() {
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-std::log(u1));  // E|z|^2 = 1
    double a = 2.0 * M_PI * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

 private:
  std::uint64_t s_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace mcbeam::rng
