#include "copcal/cvml.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "copcal/math_util.hpp"

namespace copcal {

cvml_report cvml_from_loglik_matrix(const Eigen::MatrixXd& loglik,
                                    bool drop_flagged) {
  const int m = static_cast<int>(loglik.rows());
  const int n = static_cast<int>(loglik.cols());
  if (m == 0 || n == 0) {
    throw std::invalid_argument("CVML needs a nonempty log-likelihood matrix");
  }

  cvml_report report;
  report.draw_count = m;
  report.per_observation.resize(n);
  std::vector<double> neg;
  neg.reserve(m);
  for (int j = 0; j < n; ++j) {
    neg.clear();
    bool has_zero = false;
    for (int r = 0; r < m; ++r) {
      const double ll = loglik(r, j);
      if (ll == neg_inf) {
        has_zero = true;
        if (drop_flagged) continue;
      }
      neg.push_back(-ll);
    }
    if (has_zero) report.flagged.push_back(j);
    if (neg.empty()) {
      report.per_observation[j] = neg_inf;
      continue;
    }
    // log M - logsumexp(-loglik): the log harmonic mean of the per-draw
    // likelihoods.
    report.per_observation[j] =
        std::log(static_cast<double>(neg.size())) - log_sum_exp(neg);
  }
  report.total = report.per_observation.sum();
  return report;
}

Eigen::MatrixXd per_draw_loglik_matrix(const model_spec& spec,
                                       const model_data& d,
                                       const trace_layout& layout,
                                       const Eigen::MatrixXd& draws) {
  const int m = static_cast<int>(draws.rows());
  const int n = d.n();
  Eigen::MatrixXd loglik(m, n);
  for (int r = 0; r < m; ++r) {
    const chain_state s = layout.read_state(draws.row(r));
    const Eigen::VectorXd res1 = d.y1 - d.design * s.marg1.beta;
    const Eigen::VectorXd res2 = d.y2 - d.design * s.marg2.beta;
    const Eigen::VectorXd u1 = pit_residuals(d, d.y1, s.marg1);
    const Eigen::VectorXd u2 = pit_residuals(d, d.y2, s.marg2);
    const Eigen::VectorXd eta = eta_values(d, s.calib);
    for (int j = 0; j < n; ++j) {
      const copula_parameter p(spec.family,
                               link_inverse(spec.family, eta[j]));
      loglik(r, j) = norm_log_pdf(res1[j], 0.0, s.marg1.sigma) +
                     norm_log_pdf(res2[j], 0.0, s.marg2.sigma) +
                     copula_log_density(p, u1[j], u2[j]);
    }
  }
  return loglik;
}

cvml_report cvml_estimate(const model_spec& spec, const model_data& d,
                          const mcmc_trace& trace, bool drop_flagged) {
  cvml_report report = cvml_from_loglik_matrix(
      per_draw_loglik_matrix(spec, d, trace.layout, trace.draws),
      drop_flagged);
  report.data_hash = d.data_hash;
  report.family = std::string(family_name(spec.family));
  report.n_covariates = spec.n_covariates();
  return report;
}

std::vector<int> rank_reports(const std::vector<cvml_report>& reports) {
  if (reports.empty()) {
    throw std::invalid_argument("no reports to rank");
  }
  for (const cvml_report& r : reports) {
    if (r.data_hash != reports.front().data_hash) {
      throw std::invalid_argument(
          "CVML reports were computed on different datasets (hash mismatch)");
    }
  }
  std::vector<int> order(reports.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const cvml_report& ra = reports[a];
    const cvml_report& rb = reports[b];
    if (ra.total != rb.total) return ra.total > rb.total;
    if (ra.n_covariates != rb.n_covariates) {
      return ra.n_covariates < rb.n_covariates;
    }
    return ra.family < rb.family;
  });
  return order;
}

}  // namespace copcal
