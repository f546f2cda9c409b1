#pragma once

// Deterministic random number generation. All variate transforms are
// implemented here (rather than via std:: distributions) so a given seed
// produces the same stream on any platform, which the reproducibility
// manifests rely on.

#include <cmath>
#include <cstdint>
#include <random>

#include "copcal/math_util.hpp"

namespace copcal {

class rng {
 public:
  explicit rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1): 53 random bits plus a half-ulp
  // offset, so 0 and 1 are never returned and probability transforms
  // (log, quantile) stay finite.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) * 0x1.0p-53) + 0x1.0p-54;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Standard normal by inverse cdf; exactly one engine draw per variate.
  double normal() { return norm_quantile(uniform()); }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Uniform integer in {0, ..., n-1} by rejection (no modulo bias).
  std::size_t uniform_int(std::size_t n) {
    const std::uint64_t limit =
        std::uint64_t(-1) - (std::uint64_t(-1) % static_cast<std::uint64_t>(n));
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % static_cast<std::uint64_t>(n));
  }

  bool bernoulli(double p) { return uniform() < p; }

  int binomial(int n, double p) {
    int k = 0;
    for (int i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
    return k;
  }

  // Gamma(shape, rate) via Marsaglia-Tsang squeeze; shape < 1 is boosted
  // through Gamma(shape + 1) and a power of a uniform.
  double gamma(double shape, double rate) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0, rate);
      return g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      const double v = t * t * t;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
        return d * v / rate;
      }
    }
  }

  // Inverse-gamma(shape, rate) where rate is that of the reciprocal gamma,
  // matching the shape/rate convention used by the variance priors.
  double inverse_gamma(double shape, double rate) {
    return rate / gamma(shape, 1.0);
  }

 private:
  std::mt19937_64 engine_;
};

// Derives a fresh seed for sub-stream `index` of `master`, so replicate
// chains never share an engine state.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  return splitmix64(s);
}

}  // namespace copcal
