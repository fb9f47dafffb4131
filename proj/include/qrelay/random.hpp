#pragma once
// Seedable random stream with samplers that are fully specified here, so a
// given seed reproduces bit-identical runs on any platform. std::mt19937_64
// is standard-specified; the std <random> distributions are not, so we roll
// the few we need by hand.

#include <cstdint>
#include <random>
#include <string_view>

namespace qrelay {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Stable sub-seed derivation: hash(base, label). Used to give every link,
// session, and sweep point its own independently reproducible stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(base ^ splitmix64(h));
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  bool coin() { return (engine_() & 1ULL) != 0; }

  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t limit = ~0ULL - ~0ULL % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Knuth's product method; fine for the mean photon numbers we simulate.
  int poisson(double mu) {
    const double floor_p = std::exp(-mu);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > floor_p);
    return k - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qrelay
