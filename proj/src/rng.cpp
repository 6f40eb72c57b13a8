#include "polegrowth/rng.hpp"

#include <algorithm>

namespace polegrowth {

double truncated_normal_quantile(double mean, double sigma, double a, double b,
                                 double u) {
  if (!(sigma > 0.0)) return std::clamp(mean, a, b);
  const double fa = normal_cdf((a - mean) / sigma);
  const double fb = normal_cdf((b - mean) / sigma);
  const double mass = fb - fa;
  if (!(mass > 1e-300)) return std::clamp(mean, a, b);
  const double target = fa + u * mass;
  double lo = a, hi = b;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (b - a); ++it) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf((mid - mean) / sigma) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace polegrowth
