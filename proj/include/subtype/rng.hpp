#ifndef SUBTYPE_RNG_HPP
#define SUBTYPE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace subtype {

// splitmix64, used both as a stream generator and as a stable hash for
// deriving per-entity seeds from a single run seed.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t run_seed, uint64_t stream_id) {
  uint64_t s = run_seed ^ (0x8e9c1ce2d2c5b1a7ULL * (stream_id + 1));
  uint64_t a = splitmix64(s);
  uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

// Deterministic generator with hand-rolled distributions so that output
// bytes do not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64(state_); }

  // uniform in [0, n)
  uint64_t next_below(uint64_t n) {
    // rejection sampling to avoid modulo bias
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_double() < p; }

  double normal() {
    // Box-Muller; one sample per call, second discarded for simplicity
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double lognormal(double mu, double sigma) {
    return std::exp(mu + sigma * normal());
  }

  // geometric on {0,1,2,...} with the given mean
  uint64_t geometric(double mean) {
    if (mean <= 0.0) return 0;
    double p = 1.0 / (1.0 + mean);
    double u = next_double();
    double k = std::floor(std::log1p(-u) / std::log1p(-p));
    if (k < 0) k = 0;
    return static_cast<uint64_t>(k);
  }

 private:
  uint64_t state_;
};

}  // namespace subtype

#endif
