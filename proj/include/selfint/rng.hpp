#pragma once

// Deterministic RNG streams. The engine is mt19937_64; uniforms and normals
// are produced by fixed transforms (no std::*_distribution) so that a seed
// pins the exact sample stream, and chains/workers split off child streams
// with splitmix64-mixed seeds.

#include <cmath>
#include <cstdint>
#include <random>

namespace selfint {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Modulo bias is < 2^-40 for the n used here (grid sizes).
    return eng_() % n;
  }

  // Standard normal via polar Box-Muller, one value cached.
  double normal() {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    cache_ = v * m;
    has_cache_ = true;
    return u * m;
  }

  // Deterministic child stream for chain/worker `index`.
  Rng spawn(std::uint64_t index) const {
    std::uint64_t s = seed_mix_ ^ (0x632be59bd9b4e019ULL * (index + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return Rng(a ^ (b << 1));
  }

  void note_seed(std::uint64_t seed) { seed_mix_ = seed; }

 private:
  std::mt19937_64 eng_;
  double cache_ = 0.0;
  bool has_cache_ = false;
  std::uint64_t seed_mix_ = 0;
};

// Preferred constructor: remembers the seed so spawned streams are a pure
// function of (seed, index).
inline Rng make_rng(std::uint64_t seed) {
  Rng r(seed);
  r.note_seed(seed);
  return r;
}

}  // namespace selfint
