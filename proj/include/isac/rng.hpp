#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "isac/core.hpp"

namespace isac::rng {

// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Order-independent sub-stream key: hash(master, tag, indices...).
inline std::uint64_t stream_key(std::uint64_t master, std::uint64_t tag, std::initializer_list<std::uint64_t> idx) {
  std::uint64_t h = mix64(master ^ mix64(tag));
  for (std::uint64_t i : idx) h = mix64(h ^ mix64(i + 0x632be59bd9b4e019ULL));
  return h;
}

enum Tag : std::uint64_t {
  kCommChannel = 0x636f6d6d,
  kSensingCoeff = 0x73656e73,
  kRandomization = 0x72616e64,
  kGeometry = 0x67656f6d,
};

// mt19937_64 with portable uniform/normal draws (Box-Muller), so sequences do
// not depend on the standard library's distribution implementations.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : engine_(key) {}
  Stream(std::uint64_t master, std::uint64_t tag, std::initializer_list<std::uint64_t> idx)
      : engine_(stream_key(master, tag, idx)) {}

  // Uniform in (0, 1].
  double uniform() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * kPi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  // Circularly symmetric complex Gaussian with unit variance.
  cdouble complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re * std::sqrt(0.5), im * std::sqrt(0.5)};
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace isac::rng
