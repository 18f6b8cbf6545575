#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

// Self-contained deterministic RNG. The standard <random> engines are
// portable but the distributions are not, and seeded runs here must be
// byte-reproducible across toolchains.

namespace idiolect {

inline constexpr uint64_t k_default_seed = 17;

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Independent stream seed for a (run seed, string key) pair. Used to give
// every document its own stream so corpus-level parallelism cannot change
// results.
inline uint64_t derive_seed(uint64_t seed, std::string_view key) {
  return splitmix64(seed ^ fnv1a64(key));
}

inline uint64_t mix_seeds(uint64_t a, uint64_t b) {
  return splitmix64(splitmix64(a) ^ b);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // Uniform draw in [0, n). Multiply-high mapping; bias is < 2^-64 per draw.
  uint64_t below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool coin() { return (next() & 1) != 0; }

  // Fisher-Yates over any random-access container.
  template <class Seq>
  void shuffle(Seq& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

}  // namespace idiolect
