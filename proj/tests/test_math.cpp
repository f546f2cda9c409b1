#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "copcal/math_util.hpp"
#include "copcal/rng.hpp"
#include "test_util.hpp"

using namespace copcal;

TEST_CASE("log-space helpers agree with direct evaluation") {
  // Mid-range arguments where the naive formulas are exact enough to serve
  // as the reference.
  for (double x : {-0.1, -0.5, -1.0, -3.0, -10.0}) {
    CHECK(log1mexp(x) ==
          doctest::Approx(std::log(1.0 - std::exp(x))).epsilon(1e-12));
  }
  // Near zero the series log(1 - e^x) = log(-x) + x/2 + O(x^2) is the
  // independent reference.
  const double tiny = -1e-10;
  CHECK(log1mexp(tiny) ==
        doctest::Approx(std::log(1e-10) + tiny / 2).epsilon(1e-12));

  for (double x : {1e-8, 0.5, 1.0, 5.0, 40.0, 700.0}) {
    CHECK(logexpm1(log1pexp(x)) == doctest::Approx(x).epsilon(1e-12));
  }
  CHECK(log1pexp(-800.0) == 0.0);
  CHECK(log1pexp(800.0) == 800.0);
}

TEST_CASE("log_sum_exp handles offsets and -inf") {
  const std::vector<double> v{std::log(2.0), std::log(3.0)};
  CHECK(log_sum_exp(v) == doctest::Approx(std::log(5.0)).epsilon(1e-14));

  const std::vector<double> shifted{1000.0, 1000.0 + std::log(2.0)};
  CHECK(log_sum_exp(shifted) ==
        doctest::Approx(1000.0 + std::log(3.0)).epsilon(1e-14));

  const std::vector<double> with_inf{neg_inf, 0.0};
  CHECK(log_sum_exp(with_inf) == doctest::Approx(0.0));
  const std::vector<double> all_inf{neg_inf, neg_inf};
  CHECK(log_sum_exp(all_inf) == neg_inf);
  CHECK(log_sum_exp(std::span<const double>{}) == neg_inf);
  CHECK(log_sum_exp(neg_inf, 2.5) == doctest::Approx(2.5));
}

TEST_CASE("normal wrappers round-trip and match the density") {
  for (double p : {1e-10, 0.01, 0.3, 0.5, 0.9, 1.0 - 1e-12}) {
    CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  // log phi(0) = -log(sqrt(2 pi))
  CHECK(norm_log_pdf(0.0, 0.0, 1.0) ==
        doctest::Approx(-0.5 * std::log(2.0 * 3.14159265358979323846))
            .epsilon(1e-15));
  CHECK(norm_log_pdf(3.0, 1.0, 2.0) ==
        doctest::Approx(std::log(std::exp(-0.5) / (2.0 * std::sqrt(
                                                       2.0 * 3.14159265358979323846))))
            .epsilon(1e-12));
}

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("splitmix64 matches the reference sequence from seed 0") {
  std::uint64_t state = 0;
  CHECK(splitmix64(state) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(state) == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("kendall_tau_sample on hand-counted examples") {
  const std::vector<double> x{1.0, 2.0, 3.0};
  const std::vector<double> y{1.0, 3.0, 2.0};  // one discordant pair of 3
  CHECK(kendall_tau_sample(x, y) == doctest::Approx(1.0 / 3.0));

  const std::vector<double> up{0.1, 0.4, 0.5, 0.9};
  CHECK(kendall_tau_sample(up, up) == doctest::Approx(1.0));
  std::vector<double> down(up.rbegin(), up.rend());
  CHECK(kendall_tau_sample(up, down) == doctest::Approx(-1.0));

  // 5-point case counted by brute force on paper:
  // x sorted, y = (2, 5, 1, 3, 4): discordant pairs are
  // (2,1), (5,1), (5,3), (5,4) -> D = 4, pairs = 10, tau = 1 - 8/10.
  const std::vector<double> x5{1, 2, 3, 4, 5};
  const std::vector<double> y5{2, 5, 1, 3, 4};
  CHECK(kendall_tau_sample(x5, y5) == doctest::Approx(0.2));
}

TEST_CASE("rng streams are deterministic and in range") {
  rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const double ua = a.uniform();
    const double ub = b.uniform();
    const double uc = c.uniform();
    all_equal = all_equal && (ua == ub);
    any_diff = any_diff || (ua != uc);
    CHECK(ua > 0.0);
    CHECK(ua < 1.0);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("rng moments match their distributions") {
  rng gen(7);
  const int n = 100000;

  std::vector<double> z(n);
  for (double& v : z) v = gen.normal();
  CHECK(test_util::mean_of(z) == doctest::Approx(0.0).epsilon(0.02));
  CHECK(test_util::variance_of(z) == doctest::Approx(1.0).epsilon(0.02));

  std::vector<double> g(n);
  for (double& v : g) v = gen.gamma(2.5, 2.0);
  CHECK(test_util::mean_of(g) == doctest::Approx(1.25).epsilon(0.02));
  CHECK(test_util::variance_of(g) == doctest::Approx(0.625).epsilon(0.05));

  // Small-shape branch (shape boosting): gamma(0.1, 1) has mean 0.1,
  // variance 0.1.
  std::vector<double> gs(n);
  for (double& v : gs) v = gen.gamma(0.1, 1.0);
  CHECK(test_util::mean_of(gs) == doctest::Approx(0.1).epsilon(0.05));
  CHECK(test_util::variance_of(gs) == doctest::Approx(0.1).epsilon(0.05));

  // inverse_gamma(3, 2): mean = 2/2 = 1, variance = 4/(4*1) = 1.
  std::vector<double> ig(n);
  for (double& v : ig) v = gen.inverse_gamma(3.0, 2.0);
  CHECK(test_util::mean_of(ig) == doctest::Approx(1.0).epsilon(0.05));

  std::vector<double> bin(n);
  for (double& v : bin) v = static_cast<double>(gen.binomial(10, 0.3));
  CHECK(test_util::mean_of(bin) == doctest::Approx(3.0).epsilon(0.02));
  CHECK(test_util::variance_of(bin) == doctest::Approx(2.1).epsilon(0.05));

  std::set<std::size_t> seen;
  for (int i = 0; i < 200; ++i) seen.insert(gen.uniform_int(5));
  CHECK(seen.size() == 5);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 4);
}

TEST_CASE("derive_seed separates replicate streams") {
  CHECK(derive_seed(1, 0) == 0xbeeb8da1658eec67ULL);
  CHECK(derive_seed(1, 1) == 0xf893a2eefb32555eULL);
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 100; ++i) seeds.insert(derive_seed(9, i));
  CHECK(seeds.size() == 100);
}
