#pragma once

// Scenario data generation and the three study harnesses: calibration
// estimation error (IBias^2 / IVAR / IMSE on a 400-point grid), copula
// family selection by CVML, and covariate selection by CVML.
//
// Scenario truths (data generated from a Clayton copula, log link):
//   S1: eta(x)      = log[4.5 - 1.5 sin(pi x)],      x  ~ U[0,1]
//   S2: eta(x1,x2)  = log[4.5 - sin(x1) - sin(x2)],  xi ~ U[0,1]

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "copcal/cvml.hpp"
#include "copcal/data.hpp"
#include "copcal/mcmc.hpp"
#include "copcal/model.hpp"

namespace copcal {

enum class scenario_id { s1, s2 };

std::string scenario_name(scenario_id id);
int scenario_covariates(scenario_id id);

// Exact truth formulas above, on the raw [0,1] covariate scale.
double true_calibration(scenario_id id, const Eigen::VectorXd& x);

struct scenario_spec {
  scenario_id id = scenario_id::s1;
  int n = 450;
  copula_family true_family = copula_family::clayton;
  // Marginal regression truth on [1, x...]; defaults (0.5, 1, 1.5, ...)
  // with unit residual SD (the calibration surface is what the studies
  // measure; these are recorded in manifests).
  Eigen::VectorXd beta1, beta2;
  double sigma1 = 1.0, sigma2 = 1.0;
  std::uint64_t seed = 1;
  // Extra pure-noise U[0,1] covariate columns appended after the scenario
  // covariates (used by the covariate-selection study).
  int extra_covariates = 0;
};

scenario_spec make_scenario(scenario_id id, int n, std::uint64_t seed,
                            int extra_covariates = 0);

// Per row: draw covariates, evaluate the true calibration, draw (u, v)
// from the copula by conditional sampling, then y_i = x'beta_i +
// sigma_i * Phi^-1(u_i). Deterministic given spec.seed.
dataset generate(const scenario_spec& spec);

// Equidistant evaluation grid on the raw covariate box: `target_points`
// points for S1, a 20x20 grid (row-major) for S2.
Eigen::MatrixXd scenario_grid(scenario_id id, int target_points = 400);

enum class curve_scale { theta, eta, tau };

curve_scale curve_scale_from_name(const std::string& name);
std::string curve_scale_name(curve_scale scale);

// Truth on the grid, through the family link for the theta/tau scales.
Eigen::VectorXd true_curve(scenario_id id, const Eigen::MatrixXd& grid,
                           curve_scale scale,
                           copula_family family = copula_family::clayton);

// Pointwise posterior mean of the calibration on the requested scale
// (averaging the transformed values over draws, not transforming the
// average).
Eigen::VectorXd posterior_mean_curve(const model_data& d,
                                     const mcmc_trace& trace,
                                     const Eigen::MatrixXd& grid_raw,
                                     curve_scale scale,
                                     copula_family family);

// Pointwise posterior mean and central credible interval of theta(x).
struct curve_bands {
  Eigen::MatrixXd grid;  // raw covariate values, one row per point
  Eigen::VectorXd mean, lower, upper;
};

curve_bands posterior_theta_bands(const model_data& d, const mcmc_trace& trace,
                                  const Eigen::MatrixXd& grid_raw,
                                  double level = 0.95);

// Grid over the dataset's observed covariate box with roughly
// `target_points` points spread evenly across dimensions.
Eigen::MatrixXd data_grid(const dataset& d, int target_points = 400);

// Integrated error decomposition across replicate estimates (rows) against
// the truth. IVAR uses the population variance (divide by R), which makes
// imse = ibias2 + ivar an exact identity on the grid.
struct error_report {
  double ibias2 = 0.0;
  double ivar = 0.0;
  double imse = 0.0;
  int grid_size = 0;
  int replicate_count = 0;
};

error_report error_metrics(const Eigen::MatrixXd& estimates,
                           const Eigen::VectorXd& truth);

using study_progress =
    std::function<void(int replicate, const std::string& stage)>;

struct imse_study_options {
  scenario_id id = scenario_id::s1;
  int replicates = 10;
  int n = 450;
  mcmc_options mcmc;
  std::uint64_t seed = 1;
  curve_scale scale = curve_scale::theta;
  int grid_points = 400;
  study_progress progress;
};

struct imse_study_result {
  error_report report;
  Eigen::MatrixXd estimates;  // replicates x grid
  Eigen::VectorXd truth;
  Eigen::MatrixXd grid;
  std::vector<std::uint64_t> data_seeds, chain_seeds;
};

imse_study_result run_imse_study(const imse_study_options& opt);

struct selection_study_options {
  scenario_id id = scenario_id::s1;
  int replicates = 20;
  int n = 450;
  mcmc_options mcmc;
  std::uint64_t seed = 1;
  study_progress progress;
};

// Fits Clayton/Frank/Gumbel to each Clayton-generated replicate and
// records the CVML totals (columns in that family order).
struct selection_study_result {
  Eigen::MatrixXd totals;  // replicates x 3
  int wins_vs_frank = 0;   // replicates where Clayton beats Frank
  int wins_vs_gumbel = 0;
};

selection_study_result run_copula_selection_study(
    const selection_study_options& opt);

// Generates S2 data with one spurious covariate and fits nested models
// M1 = {x1}, M2 = {x1, x2}, M3 = {x1, x2, x3}; reports CVML totals and the
// paired differences d21 = CVML(M2) - CVML(M1), d23 = CVML(M2) - CVML(M3).
struct varsel_study_options {
  int replicates = 20;
  int n = 450;
  mcmc_options mcmc;
  std::uint64_t seed = 1;
  study_progress progress;
};

struct varsel_study_result {
  Eigen::MatrixXd totals;  // replicates x 3 (M1, M2, M3)
  Eigen::VectorXd d21, d23;
  int m2_wins = 0;  // replicates where both differences are positive
};

varsel_study_result run_varsel_study(const varsel_study_options& opt);

}  // namespace copcal
