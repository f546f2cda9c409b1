#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "copcal/calibration.hpp"
#include "copcal/math_util.hpp"
#include "copcal/rng.hpp"
#include "copcal/serialize.hpp"
#include "test_util.hpp"

using namespace copcal;

namespace {

calibration_state random_calibration(rng& gen) {
  std::vector<knot_grid> grids(2);
  calibration_state s = sample_prior_calibration(gen, grids);
  s.alpha0 = 0.1 + gen.normal();
  return s;
}

bool same_calibration(const calibration_state& a, const calibration_state& b) {
  if (a.alpha0 != b.alpha0) return false;
  if (a.components.size() != b.components.size()) return false;
  for (std::size_t i = 0; i < a.components.size(); ++i) {
    const spline_component &ca = a.components[i], &cb = b.components[i];
    if (ca.alpha != cb.alpha) return false;
    if (ca.psi.size() != cb.psi.size() ||
        !(ca.psi.array() == cb.psi.array()).all()) {
      return false;
    }
    if (!(ca.gamma.array() == cb.gamma.array()).all()) return false;
    if (ca.zeta != cb.zeta || ca.lambda != cb.lambda) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("calibration JSON round-trip is bit exact") {
  rng gen(2718);
  for (int trial = 0; trial < 20; ++trial) {
    const calibration_state s = random_calibration(gen);
    const calibration_state back = calibration_from_json(calibration_to_json(s));
    CHECK(same_calibration(s, back));
    // Through text as well, since files go through dump/parse.
    const auto text = calibration_to_json(s).dump();
    CHECK(same_calibration(s, calibration_from_json(
                                  nlohmann::json::parse(text))));
  }

  nlohmann::json bad = calibration_to_json(random_calibration(gen));
  bad["components"][0]["alpha"] = {1.0, 2.0};
  CHECK_THROWS_AS(calibration_from_json(bad), std::invalid_argument);
  nlohmann::json ragged = calibration_to_json(random_calibration(gen));
  ragged["components"][0]["zeta"] = {1, 0};
  CHECK_THROWS_AS(calibration_from_json(ragged), std::invalid_argument);
}

TEST_CASE("standardization map JSON round-trip") {
  standardization_map m;
  m.center.resize(2);
  m.half_range.resize(2);
  m.center << 35.0, 0.123456789012345678;
  m.half_range << 7.0, 1e-7;
  const standardization_map back = map_from_json(map_to_json(m));
  CHECK((back.center.array() == m.center.array()).all());
  CHECK((back.half_range.array() == m.half_range.array()).all());

  nlohmann::json bad = map_to_json(m);
  bad["half_range"] = {1.0};
  CHECK_THROWS_AS(map_from_json(bad), std::invalid_argument);
}

TEST_CASE("model spec JSON: round-trip, defaults, and family validation") {
  model_spec spec;
  spec.family = copula_family::gumbel;
  spec.covariates = {2, 0};
  spec.k_max = 3;
  spec.coef_prior_var = 5.0;
  spec.sigma_prior_shape = 0.2;
  spec.sigma_prior_rate = 0.3;
  spec.lambda_binomial_p = 0.25;

  const nlohmann::json j = spec_to_json(spec);
  CHECK(j.at("family") == "gumbel");
  const model_spec back = spec_from_json(j);
  CHECK(back.family == spec.family);
  CHECK(back.covariates == spec.covariates);
  CHECK(back.k_max == 3);
  CHECK(back.coef_prior_var == 5.0);
  CHECK(back.sigma_prior_shape == 0.2);
  CHECK(back.sigma_prior_rate == 0.3);
  CHECK(back.lambda_binomial_p == 0.25);

  // Prior hyperparameters fall back to defaults when absent.
  nlohmann::json minimal{{"family", "frank"},
                         {"covariates", std::vector<int>{0}},
                         {"k_max", 4}};
  const model_spec m = spec_from_json(minimal);
  CHECK(m.family == copula_family::frank);
  CHECK(m.coef_prior_var == 10.0);
  CHECK(m.sigma_prior_shape == 0.1);

  nlohmann::json bad = j;
  bad["family"] = "gaussian";
  CHECK_THROWS_AS(spec_from_json(bad), std::invalid_argument);
}

TEST_CASE("mcmc options JSON: round-trip, mode names, defaults") {
  mcmc_options o;
  o.iterations = 1234;
  o.burn_in = 321;
  o.thin = 7;
  o.seed = 9876543210123456789ull;
  o.mode = likelihood_mode::prior_only;
  o.beta_im_prob = 0.6;
  o.beta_scale = 0.01;
  o.alpha_scale = 0.2;
  o.psi_scale = 0.9;
  o.adapt = false;
  o.adapt_window = 50;
  o.fixed_lambda = 2;
  o.fix_zeta = true;

  const mcmc_options back = options_from_json(options_to_json(o));
  CHECK(back.iterations == 1234);
  CHECK(back.burn_in == 321);
  CHECK(back.thin == 7);
  CHECK(back.seed == o.seed);
  CHECK(back.mode == likelihood_mode::prior_only);
  CHECK(back.beta_im_prob == 0.6);
  CHECK(back.beta_scale == 0.01);
  CHECK(back.alpha_scale == 0.2);
  CHECK(back.psi_scale == 0.9);
  CHECK(back.adapt == false);
  CHECK(back.adapt_window == 50);
  CHECK(back.fixed_lambda == 2);
  CHECK(back.fix_zeta == true);

  nlohmann::json minimal{{"iterations", 100}, {"burn_in", 10}, {"seed", 1}};
  const mcmc_options m = options_from_json(minimal);
  CHECK(m.mode == likelihood_mode::full);
  CHECK(m.thin == 1);
  CHECK(m.adapt == true);
  CHECK(m.fixed_lambda == -1);

  for (const auto mode : {likelihood_mode::full, likelihood_mode::marginal_only,
                          likelihood_mode::prior_only}) {
    CHECK(mode_from_name(mode_name(mode)) == mode);
  }
  CHECK_THROWS_AS(mode_from_name("partial"), std::invalid_argument);
}

TEST_CASE("cvml report JSON keeps -infinity as null") {
  cvml_report r;
  r.total = neg_inf;
  r.per_observation.resize(3);
  r.per_observation << -1.5, neg_inf, -0.25;
  r.draw_count = 42;
  r.flagged = {1};
  r.data_hash = "0123456789abcdef";
  r.family = "clayton";
  r.n_covariates = 2;
  r.label = "m2";

  const nlohmann::json j = report_to_json(r);
  CHECK(j.at("total").is_null());
  CHECK(j.at("per_observation")[1].is_null());
  CHECK(j.at("per_observation")[0] == -1.5);

  const cvml_report back = report_from_json(j);
  CHECK(back.total == neg_inf);
  CHECK(back.per_observation[0] == -1.5);
  CHECK(back.per_observation[1] == neg_inf);
  CHECK(back.per_observation[2] == -0.25);
  CHECK(back.draw_count == 42);
  CHECK(back.flagged == std::vector<int>{1});
  CHECK(back.data_hash == r.data_hash);
  CHECK(back.family == "clayton");
  CHECK(back.n_covariates == 2);
  CHECK(back.label == "m2");
}

TEST_CASE("acceptance stats serialize with rates and optional scales") {
  block_stat tuned;
  tuned.block = "alpha";
  tuned.accepted = 30;
  tuned.attempted = 120;
  tuned.scale = 0.05;
  block_stat fixed;
  fixed.block = "sigma1";
  fixed.accepted = 120;
  fixed.attempted = 120;

  const nlohmann::json a = acceptance_to_json({tuned, fixed});
  REQUIRE(a.size() == 2);
  CHECK(a[0].at("block") == "alpha");
  CHECK(a[0].at("rate") == 0.25);
  CHECK(a[0].at("scale") == 0.05);
  CHECK(a[1].at("rate") == 1.0);
  CHECK_FALSE(a[1].contains("scale"));  // untuned blocks carry no scale
}

TEST_CASE("save/load file round-trip reproduces doubles bit for bit") {
  test_util::scratch_dir dir("serialize");
  const std::string path = dir.path("state.json");

  rng gen(55);
  nlohmann::json j;
  std::vector<double> values;
  for (int i = 0; i < 64; ++i) {
    values.push_back(std::ldexp(gen.normal(), (i % 61) - 30));
  }
  j["values"] = values;
  j["text"] = "quoted \"stuff\" and unicode: é";
  save_json(j, path);

  const nlohmann::json back = load_json(path);
  const auto read = back.at("values").get<std::vector<double>>();
  REQUIRE(read.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) CHECK(read[i] == values[i]);
  CHECK(back.at("text") == j.at("text"));

  // Write is atomic in intent: failure to open reports the path.
  CHECK_THROWS_AS(save_json(j, dir.path("missing") + "/x.json"),
                  std::runtime_error);
  CHECK_THROWS_AS(load_json(dir.path("absent.json")), std::runtime_error);
}
