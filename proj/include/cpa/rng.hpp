#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

namespace cpa {

// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Fold extra words into a seed. Order-sensitive by design.
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) { return mix64(mix64(a) ^ b); }

// xoshiro256++ with splitmix64 state expansion.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) {
      x = mix64(x);
      w = x;
    }
    // all-zero state is invalid; splitmix output of anything is never all zero
    // across four consecutive words, but keep the guard cheap and explicit.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
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

  // uniform on (0,1]; never returns 0 so log() is safe.
  double uniform() {
    const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return 1.0 - u;
  }

  // uniform on [0,1)
  double uniform_co() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // integer uniform on [0, n) via rejection-free Lemire-style scaling; n > 0.
  std::uint64_t uniform_int(std::uint64_t n) {
    // 128-bit multiply keeps the bias below 2^-64, irrelevant at our n.
    const unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    return static_cast<std::uint64_t>(m >> 64);
  }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform_co();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // CN(0,1): real and imaginary parts are independent N(0, 1/2).
  std::complex<double> cnormal() {
    const double u1 = uniform();
    const double u2 = uniform_co();
    const double r = std::sqrt(-std::log(u1));
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
  }

  // Binomial(n, p). Sparse regime walks geometric gaps between successes,
  // so cost is O(np) rather than O(n); dense regime falls back to counting.
  std::uint64_t binomial(std::uint64_t n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (p > 0.5) return n - binomial(n, 1.0 - p);
    if (static_cast<double>(n) * p < 0.125 * static_cast<double>(n) || n > 64) {
      const double log1mp = std::log1p(-p);
      std::uint64_t count = 0;
      double pos = 0.0;
      for (;;) {
        pos += std::floor(std::log(uniform()) / log1mp) + 1.0;
        if (pos > static_cast<double>(n)) return count;
        ++count;
      }
    }
    std::uint64_t count = 0;
    for (std::uint64_t i = 0; i < n; ++i) count += (uniform_co() < p) ? 1 : 0;
    return count;
  }

  // Poisson(mean): exponential-gap counting for small means, Hormann's
  // transformed rejection (PTRS) above, so cost stays O(1) as the mean grows.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 10.0) {
      std::uint64_t k = 0;
      double acc = 0.0;
      for (;;) {
        acc += -std::log(uniform());
        if (acc >= mean) return k;
        ++k;
      }
    }
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
      const double U = uniform_co() - 0.5;
      const double V = uniform();
      const double us = 0.5 - std::abs(U);
      const double kd = std::floor((2.0 * a / us + b) * U + mean + 0.43);
      if (us >= 0.07 && V <= v_r) return static_cast<std::uint64_t>(kd);
      if (kd < 0.0 || (us < 0.013 && V > us)) continue;
      if (std::log(V * inv_alpha / (a / (us * us) + b)) <=
          kd * log_mean - mean - std::lgamma(kd + 1.0))
        return static_cast<std::uint64_t>(kd);
    }
  }

  // Gamma(shape, 1) for shape >= 1, Marsaglia-Tsang squeeze method.
  double gamma(double shape) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

// Purpose tags keep independent random streams from ever sharing state.
// Adding a tag is free; reordering existing ones breaks reproducibility.
enum class Stream : std::uint64_t {
  Schedule = 1,
  Channels = 2,
  PilotNoise = 3,
  DataSymbols = 4,
  DataNoise = 5,
  OrthoPower = 6,
  PiNode = 7,
  PiCross = 8,
  Downlink = 9,
  Misc = 10,
};

// Derive the generator for (seed, purpose, a, b). Streams with distinct
// coordinates are statistically independent; the same coordinates always
// reproduce the same sequence, which is what makes trials replayable and
// thread-count-invariant.
inline Rng rng_stream(std::uint64_t seed, Stream purpose, std::uint64_t a = 0,
                      std::uint64_t b = 0) {
  std::uint64_t x = mix64(seed, static_cast<std::uint64_t>(purpose));
  x = mix64(x, a);
  x = mix64(x, b);
  return Rng(x);
}

// Canonical folding of a double into stream coordinates (exact bit pattern,
// so 0.25 and 0.250000001 are distinct on purpose).
inline std::uint64_t fold_bits(double v) {
  std::uint64_t u;
  static_assert(sizeof(u) == sizeof(v));
  __builtin_memcpy(&u, &v, sizeof(u));
  return u;
}

}  // namespace cpa
