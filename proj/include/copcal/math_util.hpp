#pragma once

// Small numeric helpers shared across the library: stable log-space
// reductions, normal distribution wrappers, hashing, and rank correlation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include <boost/math/distributions/normal.hpp>

namespace copcal {

// Sentinel for log(0); arithmetic with it follows IEEE rules.
inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// log(1 - exp(x)) for x < 0, switching branches at x = -log(2) to avoid
// cancellation on either side.
inline double log1mexp(double x) {
  if (x >= 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (x > -0.6931471805599453) return std::log(-std::expm1(x));
  return std::log1p(-std::exp(x));
}

// log(exp(x) - 1) for x > 0.
inline double logexpm1(double x) {
  if (x <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (x > 36.0) return x;  // exp(-x) below double resolution of x
  return std::log(std::expm1(x));
}

// log(1 + exp(x)) without overflow.
inline double log1pexp(double x) {
  if (x > 36.0) return x;
  if (x < -745.0) return 0.0;
  return std::log1p(std::exp(x));
}

// Stable log(sum(exp(v))) over a span; returns -inf for an empty span or
// when every element is -inf.
inline double log_sum_exp(std::span<const double> v) {
  double m = neg_inf;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline double log_sum_exp(double a, double b) {
  if (a == neg_inf) return b;
  if (b == neg_inf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// Standard normal density, cdf, and quantile (Boost implementations).
inline double norm_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.9189385332046727 - std::log(sd) - 0.5 * z * z;
}

inline double norm_cdf(double x) {
  static const boost::math::normal_distribution<double> std_normal;
  return boost::math::cdf(std_normal, x);
}

inline double norm_quantile(double p) {
  static const boost::math::normal_distribution<double> std_normal;
  return boost::math::quantile(std_normal, p);
}

// FNV-1a 64-bit hash, used to fingerprint datasets and configurations.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// splitmix64 step; used to derive independent per-replicate seeds from a
// master seed without overlapping mt19937_64 streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace detail {

// Merge sort that counts inversions (pairs out of order).
inline std::uint64_t count_inversions(std::vector<double>& v,
                                      std::vector<double>& scratch,
                                      std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t count = count_inversions(v, scratch, lo, mid) +
                        count_inversions(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      count += mid - i;  // v[i..mid) all exceed v[j]
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return count;
}

}  // namespace detail

// Sample version of Kendall's tau (no tie correction; inputs are assumed
// continuous): sort by x, count y-inversions by merge sort, O(n log n).
inline double kendall_tau_sample(std::span<const double> x,
                                 std::span<const double> y) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ysorted(n), scratch(n);
  for (std::size_t i = 0; i < n; ++i) ysorted[i] = y[order[i]];
  const std::uint64_t discordant =
      detail::count_inversions(ysorted, scratch, 0, n);
  const double pairs = 0.5 * static_cast<double>(n) *
                       static_cast<double>(n - 1);
  return 1.0 - 2.0 * static_cast<double>(discordant) / pairs;
}

}  // namespace copcal
