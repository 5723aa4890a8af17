#pragma once

// Seeded random streams. Draws are built from raw 64-bit engine output so
// sequences do not depend on the standard library's distribution code.

#include <cstdint>
#include <random>
#include <string_view>

namespace winr {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Independent stream for (seed, tag), e.g. Rng::stream(seed, "hidden").
  static Rng stream(std::uint64_t seed, std::string_view tag) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : tag) h = (h ^ c) * 0x100000001B3ull;
    return Rng(seed ^ splitmix64(h));
  }

  std::uint64_t bits() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace winr
