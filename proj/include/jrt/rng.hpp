#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace jrt {

inline uint64_t mix64(uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash2(uint64_t a, uint64_t b) { return mix64(a * 0x9e3779b97f4a7c15ULL + mix64(b)); }

/// Deterministic RNG with hand-rolled distributions so draws are stable
/// across standard library implementations.
struct Rng {
  std::mt19937_64 eng;

  explicit Rng(uint64_t seed) : eng(seed) {}

  uint64_t next_u64() { return eng(); }

  /// uniform double in [0,1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  float uniformf(float lo, float hi) { return lo + static_cast<float>(uniform()) * (hi - lo); }

  /// inclusive range
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }

  /// standard normal via Box-Muller (one draw used, one discarded)
  float normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return static_cast<float>(std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      int j = uniform_int(0, i);
      std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(j)]);
    }
  }

  /// sample an index proportional to probs (assumed to sum to ~1)
  int categorical(std::span<const float> probs) {
    double r = uniform();
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (r < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }
};

}  // namespace jrt
