#pragma once

// Deterministic random number utilities. All distributions are hand-rolled on
// top of mt19937_64 so that a given seed reproduces the same stream on every
// platform, independent of the standard library's <random> distributions.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace waveqed {

// SplitMix64 finalizer; good avalanche, used to derive child seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed for realization `index`, stream `tag` (positions, atom count, ...).
// Counter-based: no correlation between streams for any (master, index) pair.
inline std::uint64_t child_seed(std::uint64_t master, std::uint64_t index,
                                std::uint64_t tag = 0) {
  return mix64(mix64(master + 0x9e3779b97f4a7c15ULL * index) ^ tag);
}

namespace seed_tag {
inline constexpr std::uint64_t positions = 0x706f736974696f6eULL;  // "position"
inline constexpr std::uint64_t atom_count = 0x61746f6d636e7420ULL; // "atomcnt "
inline constexpr std::uint64_t bootstrap = 0x626f6f7473747261ULL;  // "bootstra"
} // namespace seed_tag

// FNV-1a over bytes; used for config hashes and output-file digests.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller (cosine branch only, stateless).
  double normal() {
    const double u1 = 1.0 - uniform01(); // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double exponential(double mean) {
    return -mean * std::log(1.0 - uniform01());
  }

  // Exact Poisson sampling. Large means are reduced by additivity
  // Poisson(m) = Poisson(c) + Poisson(m - c) until Knuth's product method
  // is numerically safe.
  long poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean < 0");
    long total = 0;
    constexpr double chunk = 25.0;
    while (mean > 30.0) {
      total += poisson_knuth(chunk);
      mean -= chunk;
    }
    return total + poisson_knuth(mean);
  }

  std::uint64_t raw() { return engine_(); }

private:
  long poisson_knuth(double mean) {
    const double limit = std::exp(-mean);
    long k = 0;
    double prod = uniform01();
    while (prod > limit) {
      ++k;
      prod *= uniform01();
    }
    return k;
  }

  std::mt19937_64 engine_;
};

} // namespace waveqed
