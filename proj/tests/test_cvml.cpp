#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "copcal/cvml.hpp"
#include "copcal/data.hpp"
#include "copcal/math_util.hpp"
#include "copcal/mcmc.hpp"
#include "copcal/model.hpp"
#include "copcal/rng.hpp"
#include "copcal/simulation.hpp"
#include "test_util.hpp"

using namespace copcal;

namespace {

cvml_report labeled(double total, const std::string& family, int covs,
                    const std::string& hash = "h") {
  cvml_report r;
  r.total = total;
  r.family = family;
  r.n_covariates = covs;
  r.data_hash = hash;
  return r;
}

}  // namespace

TEST_CASE("single-draw and constant-draw estimates are exact") {
  Eigen::MatrixXd one(1, 3);
  one << -1.5, -0.25, -3.0;
  const cvml_report r1 = cvml_from_loglik_matrix(one);
  REQUIRE(r1.per_observation.size() == 3);
  CHECK(r1.draw_count == 1);
  for (int j = 0; j < 3; ++j) {
    CHECK(r1.per_observation[j] == doctest::Approx(one(0, j)).epsilon(1e-14));
  }
  CHECK(r1.total ==
        doctest::Approx(one.row(0).sum()).epsilon(1e-14));

  Eigen::MatrixXd constant(40, 2);
  constant.col(0).setConstant(-2.25);
  constant.col(1).setConstant(-0.5);
  const cvml_report rc = cvml_from_loglik_matrix(constant);
  CHECK(rc.per_observation[0] == doctest::Approx(-2.25).epsilon(1e-13));
  CHECK(rc.per_observation[1] == doctest::Approx(-0.5).epsilon(1e-13));
  CHECK(rc.flagged.empty());
}

TEST_CASE("estimator equals the log-space harmonic mean, bounded by the max") {
  rng gen(91);
  Eigen::MatrixXd ll(200, 5);
  for (int m = 0; m < ll.rows(); ++m) {
    for (int j = 0; j < ll.cols(); ++j) ll(m, j) = -2.0 + gen.normal();
  }
  const cvml_report r = cvml_from_loglik_matrix(ll);
  double total = 0.0;
  for (int j = 0; j < ll.cols(); ++j) {
    // Direct oracle with long-double accumulation of the reciprocals.
    long double s = 0.0L;
    for (int m = 0; m < ll.rows(); ++m) s += std::exp(-(long double)ll(m, j));
    const double direct = -static_cast<double>(
        std::log(s / static_cast<long double>(ll.rows())));
    CHECK(r.per_observation[j] == doctest::Approx(direct).epsilon(1e-12));
    CHECK(r.per_observation[j] <= ll.col(j).maxCoeff() + 1e-12);
    total += r.per_observation[j];
  }
  CHECK(r.total == doctest::Approx(total).epsilon(1e-13));
}

TEST_CASE("permutation of draws leaves the estimate unchanged") {
  rng gen(17);
  Eigen::MatrixXd ll(64, 4);
  for (int m = 0; m < ll.rows(); ++m) {
    for (int j = 0; j < ll.cols(); ++j) ll(m, j) = -1.0 - 4.0 * gen.uniform();
  }
  std::vector<int> order(ll.rows());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937(3));
  Eigen::MatrixXd shuffled(ll.rows(), ll.cols());
  for (int m = 0; m < ll.rows(); ++m) shuffled.row(m) = ll.row(order[m]);

  const cvml_report a = cvml_from_loglik_matrix(ll);
  const cvml_report b = cvml_from_loglik_matrix(shuffled);
  for (int j = 0; j < ll.cols(); ++j) {
    CHECK(a.per_observation[j] ==
          doctest::Approx(b.per_observation[j]).epsilon(1e-12));
  }
}

TEST_CASE("zero-likelihood draws flag the observation") {
  Eigen::MatrixXd ll(4, 3);
  ll.setConstant(-1.0);
  ll(2, 1) = neg_inf;

  const cvml_report keep = cvml_from_loglik_matrix(ll);
  REQUIRE(keep.flagged == std::vector<int>{1});
  CHECK(keep.per_observation[0] == doctest::Approx(-1.0));
  CHECK(keep.per_observation[1] == neg_inf);
  CHECK(keep.total == neg_inf);

  // Opt-in exclusion drops only the offending draws of that observation.
  const cvml_report drop = cvml_from_loglik_matrix(ll, true);
  REQUIRE(drop.flagged == std::vector<int>{1});
  CHECK(drop.per_observation[1] == doctest::Approx(-1.0));
  CHECK(std::isfinite(drop.total));
}

TEST_CASE("ranking: paper totals order and deterministic tie-breaking") {
  // Family-selection totals for the richer calibration model: Frank wins,
  // Clayton second, Gumbel last.
  std::vector<cvml_report> table{labeled(-10213.4, "clayton", 1),
                                 labeled(-7683.7, "frank", 1),
                                 labeled(-54763.2, "gumbel", 1)};
  CHECK(rank_reports(table) == std::vector<int>{1, 0, 2});

  // Constant-versus-calibrated comparison: -5569.4 beats -7683.7.
  std::vector<cvml_report> pair{labeled(-5569.4, "frank", 1),
                                labeled(-7683.7, "frank", 1)};
  CHECK(rank_reports(pair) == std::vector<int>{0, 1});

  // Exact ties: fewer covariates first, then family name.
  std::vector<cvml_report> ties{labeled(-10.0, "gumbel", 2),
                                labeled(-10.0, "clayton", 2),
                                labeled(-10.0, "frank", 1)};
  CHECK(rank_reports(ties) == std::vector<int>{2, 1, 0});

  std::vector<cvml_report> mixed{labeled(-1.0, "clayton", 1, "aaa"),
                                 labeled(-2.0, "clayton", 1, "bbb")};
  CHECK_THROWS_AS(rank_reports(mixed), std::invalid_argument);
}

TEST_CASE("trace-based estimate agrees with the matrix entry point") {
  const scenario_spec sc = make_scenario(scenario_id::s1, 90, 77);
  const dataset raw = generate(sc);
  model_spec spec;
  spec.family = copula_family::clayton;
  spec.covariates = {0};
  const model_data d = prepare_model_data(raw, spec);

  mcmc_options opt;
  opt.iterations = 1200;
  opt.burn_in = 400;
  opt.seed = 3;
  const mcmc_trace t = run_chain(spec, d, opt);

  const cvml_report r = cvml_estimate(spec, d, t);
  CHECK(r.draw_count == t.n_draws());
  CHECK(r.data_hash == d.data_hash);
  CHECK(r.family == "clayton");
  CHECK(r.n_covariates == 1);
  REQUIRE(r.per_observation.size() == d.n());
  CHECK(r.total ==
        doctest::Approx(r.per_observation.sum()).epsilon(1e-12));

  const Eigen::MatrixXd ll =
      per_draw_loglik_matrix(spec, d, t.layout, t.draws);
  const cvml_report direct = cvml_from_loglik_matrix(ll);
  for (int j = 0; j < d.n(); ++j) {
    CHECK(r.per_observation[j] ==
          doctest::Approx(direct.per_observation[j]).epsilon(1e-13));
  }

  // The per-draw matrix is the joint log likelihood of the stored states.
  for (int m = 0; m < 5; ++m) {
    const chain_state s = t.layout.read_state(t.draws.row(m));
    CHECK(ll.row(m).sum() ==
          doctest::Approx(joint_loglik(spec, d, s)).epsilon(1e-10));
  }
}

TEST_CASE("disjoint half-traces give stable totals on an S1 fit") {
  const scenario_spec sc = make_scenario(scenario_id::s1, 150, 31);
  const dataset raw = generate(sc);
  model_spec spec;
  spec.family = copula_family::clayton;
  spec.covariates = {0};
  const model_data d = prepare_model_data(raw, spec);

  mcmc_options opt;
  opt.iterations = 4000;
  opt.burn_in = 1000;
  opt.seed = 8;
  const mcmc_trace t = run_chain(spec, d, opt);

  const Eigen::MatrixXd ll =
      per_draw_loglik_matrix(spec, d, t.layout, t.draws);
  const int half = static_cast<int>(ll.rows()) / 2;
  const cvml_report first =
      cvml_from_loglik_matrix(ll.topRows(half));
  const cvml_report second =
      cvml_from_loglik_matrix(ll.bottomRows(ll.rows() - half));
  CHECK(std::abs(first.total - second.total) <
        0.05 * std::abs(first.total));
}
