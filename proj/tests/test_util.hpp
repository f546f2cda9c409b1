#pragma once

// Shared test-side tooling: adaptive 2D quadrature over the unit square,
// finite differences, simple file helpers, and a scratch-directory guard.
// Everything here is independent of the library internals so the oracle
// checks do not reuse the code under test.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace test_util {

// Integral of `density` over (0,1)^2, computed in normal-scores coordinates
// u = Phi(x), v = Phi(y) so boundary concentration (tail dependence) is
// resolved by ordinary Gauss-Kronrod panels. The range stops at |x| = 8
// because Phi(x) must stay strictly inside (0, 1) in double precision
// (Phi(8.3) already rounds to 1); the truncated mass is below 1e-15.
template <class F>
double integrate_unit_square(F density) {
  using boost::math::quadrature::gauss_kronrod;
  static const boost::math::normal_distribution<double> normal;
  const auto outer = [&](double x) {
    const double u = boost::math::cdf(normal, x);
    const double px = boost::math::pdf(normal, x);
    const auto inner = [&](double y) {
      const double v = boost::math::cdf(normal, y);
      return density(u, v) * boost::math::pdf(normal, y);
    };
    return px * gauss_kronrod<double, 31>::integrate(inner, -8.0, 8.0, 12,
                                                     1e-10);
  };
  return gauss_kronrod<double, 31>::integrate(outer, -8.0, 8.0, 12, 1e-10);
}

// Integral of f over [a, b] (for Debye-function style cross checks).
template <class F>
double integrate_1d(F f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-12);
}

// Symmetric central difference d/dx f(x).
template <class F>
double central_diff(F f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

// Creates a unique scratch directory under the system temp dir and removes
// it on destruction.
class scratch_dir {
 public:
  explicit scratch_dir(const std::string& tag) {
    static std::mt19937_64 gen(std::random_device{}());
    dir_ = std::filesystem::temp_directory_path() /
           (tag + "-" + std::to_string(gen()));
    std::filesystem::create_directories(dir_);
  }
  ~scratch_dir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  scratch_dir(const scratch_dir&) = delete;
  scratch_dir& operator=(const scratch_dir&) = delete;

  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }
  std::string dir() const { return dir_.string(); }

 private:
  std::filesystem::path dir_;
};

// Sample mean / variance helpers used by the Monte Carlo checks.
inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace test_util
