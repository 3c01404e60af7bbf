#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace symharm {

// All randomness in the library flows through this wrapper so that a single
// seed reproduces every report bit for bit. Gaussians use explicit
// Box-Muller; std::normal_distribution is not stable across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {
    return (gen_() >> 11) * 0x1.0p-53;  // [0, 1)
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  int uniform_int(int n) {  // [0, n)
    return static_cast<int>(gen_() % static_cast<std::uint64_t>(n));
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double m = std::sqrt(-2.0 * std::log(u1));
    spare_ = m * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return m * std::cos(2.0 * M_PI * u2);
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a, used both for config hashing and for deriving per-module
// substreams from the master seed.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  return seed ^ fnv1a(tag);
}

}  // namespace symharm
