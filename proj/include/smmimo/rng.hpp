#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string_view>

namespace smmimo {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// xoshiro256++ generator. Not cryptographic; chosen for speed and a fixed,
/// platform-independent output sequence.
class Xoshiro256pp {
 public:
  Xoshiro256pp() : Xoshiro256pp(0) {}

  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64_next(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

// Counter-based stream derivation: every (seed, purpose tag, index) triple owns
// an independent generator, so estimators can shard draws across workers and
// still reproduce exactly for a fixed seed regardless of worker count.
inline Xoshiro256pp derive_stream(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  std::uint64_t sm = seed ^ 0x2545f4914f6cdd1dULL;
  sm ^= fnv1a64(tag);
  splitmix64_next(sm);
  sm ^= index * 0xd6e8feb86659fd93ULL;
  return Xoshiro256pp(splitmix64_next(sm));
}

/// Uniform in [0, 1).
inline double uniform01(Xoshiro256pp& g) { return static_cast<double>(g.next() >> 11) * 0x1.0p-53; }

/// Uniform in (0, 1]; safe under log().
inline double uniform01_open(Xoshiro256pp& g) {
  return (static_cast<double>(g.next() >> 11) + 1.0) * 0x1.0p-53;
}

/// Marsaglia polar method; two independent N(0,1) samples per call.
inline void normal_pair(Xoshiro256pp& g, double& a, double& b) {
  double u, v, s;
  do {
    u = 2.0 * uniform01(g) - 1.0;
    v = 2.0 * uniform01(g) - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  a = u * f;
  b = v * f;
}

/// Circularly symmetric complex Gaussian with unit variance (1/2 per component).
inline std::complex<double> complex_normal(Xoshiro256pp& g) {
  double a, b;
  normal_pair(g, a, b);
  return {a * M_SQRT1_2, b * M_SQRT1_2};
}

}  // namespace smmimo
