#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace polegrowth {

// Counter-free splittable PRNG. Every cell of a genealogy, every tagged-path
// replicate and every Monte Carlo worker owns its own stream, keyed by a
// 64-bit value derived from (master seed, position). Draws therefore do not
// depend on traversal order or thread count.
//
// The generator is the SplitMix64 step (Steele, Lea, Flood 2014), which is
// also used for key derivation.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives an independent stream key from a parent key and a salt.
// Salts used by this project: 2/3 for tree children (pole 0/1),
// small constants for named sub-streams, replicate indices for ensembles.
inline std::uint64_t derive_key(std::uint64_t key, std::uint64_t salt) {
  return splitmix64(key ^ (0x9E3779B97F4A7C15ULL * (salt + 0x632BE59BD9B4E019ULL)));
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64() {
    state_ = splitmix64(state_ + 0xD1B54A32D192ED03ULL);
    return state_;
  }

  // Uniform on the open interval (0,1); never returns an exact endpoint.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  // Unit exponential, strictly positive.
  double exponential() { return -std::log(uniform01()); }

  // Returns 1 with probability p1, else 0.
  int bernoulli(double p1) { return uniform01() < p1 ? 1 : 0; }

 private:
  std::uint64_t state_;
};

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

// Quantile of a N(mean, sigma^2) truncated to [a, b], evaluated at u in (0,1)
// by bisection on the cdf. Deterministic, one uniform per draw. Degenerate
// windows (numerically zero mass) collapse to the point of [a,b] nearest the
// mean.
double truncated_normal_quantile(double mean, double sigma, double a, double b,
                                 double u);

}  // namespace polegrowth
