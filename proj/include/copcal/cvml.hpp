#pragma once

// Cross-validated marginal likelihood: per observation j, the leave-one-out
// predictive density is estimated from full-data posterior draws via the
// harmonic-mean identity
//   p(Y_j | D_-j) ~= [ (1/M) sum_m p(Y_j | w_m)^-1 ]^-1,
// evaluated in log space as log M - logsumexp_m(-loglik_jm). The criterion
// is the sum over observations; larger is better.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "copcal/mcmc.hpp"
#include "copcal/model.hpp"

namespace copcal {

struct cvml_report {
  double total = 0.0;               // exact sum of per_observation
  Eigen::VectorXd per_observation;  // log conditional predictive ordinates
  int draw_count = 0;
  std::vector<int> flagged;  // observations with a zero-likelihood draw
  std::string data_hash;
  // Model identity, used for deterministic tie-breaking in comparisons.
  std::string family;
  int n_covariates = 0;
  std::string label;
};

// Core estimator over a draws x observations matrix of per-draw joint log
// likelihoods. Flagged observations (some draw has log likelihood -inf)
// get per_observation = -inf unless drop_flagged, in which case the
// offending draws are excluded from that observation's average.
cvml_report cvml_from_loglik_matrix(const Eigen::MatrixXd& loglik,
                                    bool drop_flagged = false);

// Per-draw joint log density log p(y1_j, y2_j | w_m) for every kept draw
// and observation, reconstructed from trace rows.
Eigen::MatrixXd per_draw_loglik_matrix(const model_spec& spec,
                                       const model_data& d,
                                       const trace_layout& layout,
                                       const Eigen::MatrixXd& draws);

cvml_report cvml_estimate(const model_spec& spec, const model_data& d,
                          const mcmc_trace& trace, bool drop_flagged = false);

// Descending CVML order; ties broken by fewer copula covariates, then
// lexicographic family name. Throws if the reports' dataset hashes differ.
std::vector<int> rank_reports(const std::vector<cvml_report>& reports);

}  // namespace copcal
