#pragma once

// Metropolis-within-Gibbs sampler. One sweep updates, in this fixed order:
// beta1, beta2 (0.8/0.2 mixture of conjugate Independent Metropolis and
// random walk), sigma1, sigma2 (IM from the printed inverse-gamma
// conditional), the joint alpha block (RWM over the intercept and all
// polynomial coefficients), then per copula covariate: zeta (flip/swap),
// psi (RWM on active, prior refresh on inactive), gamma (prior-proposal IM
// on active, refresh on inactive), lambda (IM from its binomial prior).
// Random-walk scales adapt on 100-iteration windows during burn-in only
// and are frozen afterwards, so the retained draws come from a fixed
// kernel.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "copcal/model.hpp"

namespace copcal {

struct mcmc_options {
  int iterations = 10000;
  int burn_in = 3000;
  int thin = 1;
  std::uint64_t seed = 1;
  likelihood_mode mode = likelihood_mode::full;

  double beta_im_prob = 0.8;
  double beta_scale = 0.05;   // initial RWM scales, tuned during burn-in
  double alpha_scale = 0.10;
  double psi_scale = 0.50;
  bool adapt = true;
  int adapt_window = 100;

  // Testing hooks: pin lambda to a fixed value (skipping its update) or
  // freeze the zeta indicators at their initial configuration.
  int fixed_lambda = -1;
  bool fix_zeta = false;
};

// Tuning bands (acceptance-rate targets) for the adapted RWM blocks.
inline constexpr double beta_target_lo = 0.20, beta_target_hi = 0.30;
inline constexpr double alpha_target_lo = 0.20, alpha_target_hi = 0.40;
inline constexpr double psi_target_lo = 0.20, psi_target_hi = 0.50;

struct block_stat {
  std::string block;
  std::uint64_t accepted = 0;   // post-burn-in counts (fixed kernel)
  std::uint64_t attempted = 0;
  double scale = std::numeric_limits<double>::quiet_NaN();  // final, if tuned

  double rate() const {
    return attempted == 0 ? 0.0
                          : static_cast<double>(accepted) /
                                static_cast<double>(attempted);
  }
};

// Fixed column order of a trace row:
// beta1_0..beta1_d, beta2_0..beta2_d, sigma1, sigma2, alpha0, then per
// covariate i: alpha_i_1..3, psi_i_1..k, gamma_i_1..k, zeta_i_1..k,
// lambda_i. sigma columns store the residual SD.
struct trace_layout {
  int design_dim = 0;
  int n_cov = 0;
  int k_max = 0;

  int per_cov() const { return 3 + 3 * k_max + 1; }
  int n_columns() const { return 2 * design_dim + 3 + n_cov * per_cov(); }

  int beta(int outcome, int j) const { return outcome * design_dim + j; }
  int sigma(int outcome) const { return 2 * design_dim + outcome; }
  int alpha0() const { return 2 * design_dim + 2; }
  int cov_base(int i) const { return 2 * design_dim + 3 + i * per_cov(); }
  int alpha(int i, int j) const { return cov_base(i) + j; }
  int psi(int i, int k) const { return cov_base(i) + 3 + k; }
  int gamma(int i, int k) const { return cov_base(i) + 3 + k_max + k; }
  int zeta(int i, int k) const { return cov_base(i) + 3 + 2 * k_max + k; }
  int lambda(int i) const { return cov_base(i) + 3 + 3 * k_max; }

  std::vector<std::string> column_names() const;
  void write_row(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row,
                 const chain_state& s) const;
  chain_state read_state(const Eigen::RowVectorXd& row) const;
};

struct mcmc_trace {
  trace_layout layout;
  Eigen::MatrixXd draws;  // kept draws x columns
  std::vector<block_stat> acceptance;
  std::uint64_t seed = 0;
  model_spec spec;
  mcmc_options options;

  int n_draws() const { return static_cast<int>(draws.rows()); }
};

// Runs one chain; deterministic given options.seed. Throws if the initial
// log posterior is not finite.
mcmc_trace run_chain(const model_spec& spec, const model_data& d,
                     const mcmc_options& options);

// Trace CSV: header of column names, one row per kept draw, 17 significant
// digits.
void write_trace_csv(const mcmc_trace& trace, const std::string& path);

// Reads draws back against a layout reconstructed from the model spec.
Eigen::MatrixXd read_trace_csv(const std::string& path,
                               const trace_layout& layout);

}  // namespace copcal
