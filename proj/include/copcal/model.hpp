#pragma once

// The full Bayesian model: two normal marginal regressions coupled by a
// covariate-driven copula, plus every prior density. Functions here are
// pure evaluations over an immutable prepared dataset; the sampler and the
// model-selection estimator are built on top of them.
//
// Priors: beta_i | sigma_i^2 ~ N(0, sigma_i^2 I); sigma_i^2 ~ IG(0.1, 0.1)
// (shape/rate); alpha0, alpha_j, psi_k ~ N(0, 10) where 10 is a variance;
// gamma_k ~ Uniform(I_k); lambda ~ Binomial(k_max, 1/2); |zeta| ~ right-
// truncated Poisson(lambda); zeta configurations of equal size equally
// likely.

#include <vector>

#include <Eigen/Dense>

#include "copcal/calibration.hpp"
#include "copcal/copula.hpp"
#include "copcal/data.hpp"

namespace copcal {

// Which factors of the posterior the sampler targets. The reduced modes
// exist for oracle tests: marginal_only makes the conjugate updates exact,
// prior_only turns the chain into a prior sampler.
enum class likelihood_mode { full, marginal_only, prior_only };

struct model_spec {
  copula_family family = copula_family::clayton;
  std::vector<int> covariates;  // 0-based dataset columns, used in margins
                                // and calibration alike
  int k_max = 4;

  double coef_prior_var = 10.0;
  double sigma_prior_shape = 0.1;
  double sigma_prior_rate = 0.1;
  double lambda_binomial_p = 0.5;

  int n_covariates() const { return static_cast<int>(covariates.size()); }
};

struct marginal_state {
  Eigen::VectorXd beta;  // intercept + one coefficient per model covariate
  double sigma = 1.0;    // residual SD (prior and proposals act on sigma^2)
};

struct chain_state {
  marginal_state marg1, marg2;
  calibration_state calib;
};

// Dataset projected onto a model's covariate subset, standardized, with
// the design matrix and knot grids the sampler needs.
struct model_data {
  Eigen::VectorXd y1, y2;
  Eigen::MatrixXd design;  // n x (1 + q): intercept column then covariates
  Eigen::MatrixXd z;       // n x q standardized covariates
  std::vector<knot_grid> grids;  // one per covariate, spanning [-1, 1]
  standardization_map map;       // for the selected columns
  std::string data_hash;         // fingerprint of the raw source dataset

  int n() const { return static_cast<int>(y1.size()); }
  int design_dim() const { return static_cast<int>(design.cols()); }
  int n_covariates() const { return static_cast<int>(z.cols()); }
};

model_data prepare_model_data(const dataset& raw, const model_spec& spec);

// Gaussian marginal log likelihood sum_j log phi(y_j; x_j'beta, sigma).
double marginal_loglik(const model_data& d, const Eigen::VectorXd& y,
                       const marginal_state& m);

// Probability integral transforms u_j = Phi((y_j - x_j'beta)/sigma),
// clamped into [1e-12, 1 - 1e-12]. This is the single choke point keeping
// copula evaluations off the boundary.
Eigen::VectorXd pit_residuals(const model_data& d, const Eigen::VectorXd& y,
                              const marginal_state& m);

// Calibration values eta(x_j) for every observation.
Eigen::VectorXd eta_values(const model_data& d, const calibration_state& s);

// sum_j log c(u1_j, u2_j | link_inverse(eta_j)).
double copula_loglik(copula_family family, const Eigen::VectorXd& eta,
                     const Eigen::VectorXd& u1, const Eigen::VectorXd& u2);

// Joint log likelihood = marginal parts + copula part (exact identity).
double joint_loglik(const model_spec& spec, const model_data& d,
                    const chain_state& s);

// Log prior density of the full parameter vector, as a density in
// (beta, sigma^2, alpha0, alpha, psi, gamma, zeta, lambda). States outside
// the support return -infinity.
double log_prior(const model_spec& spec, const model_data& d,
                 const chain_state& s);

double inverse_gamma_log_pdf(double x, double shape, double rate);

// Sufficient statistics of the no-copula conjugate update for one outcome:
// posterior beta | sigma^2 ~ N(mu, sigma^2 (I + X'X)^-1).
struct conjugate_cache {
  Eigen::MatrixXd lambda_mat;        // I + X'X
  Eigen::LLT<Eigen::MatrixXd> llt;   // Cholesky of lambda_mat
  Eigen::VectorXd mu;                // (I + X'X)^-1 X'y
  double yty = 0.0;
  double mu_quad = 0.0;              // mu' (I + X'X) mu

  // (b - mu)' (I + X'X) (b - mu)
  double quad(const Eigen::VectorXd& b) const {
    return (llt.matrixU() * (b - mu)).squaredNorm();
  }
};

conjugate_cache make_conjugate_cache(const Eigen::MatrixXd& design,
                                     const Eigen::VectorXd& y);

// One exact draw from the no-copula posterior of (beta, sigma^2): used for
// chain initialization and as the conjugate-oracle reference.
marginal_state draw_conjugate_marginal(const model_spec& spec,
                                       const conjugate_cache& c, int n,
                                       rng& gen);

}  // namespace copcal
