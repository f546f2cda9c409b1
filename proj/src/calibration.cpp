#include "copcal/calibration.hpp"

#include <algorithm>
#include <stdexcept>

#include "copcal/math_util.hpp"

namespace copcal {

calibration_state make_initial_calibration(const std::vector<knot_grid>& grids,
                                           int lambda_init) {
  calibration_state s;
  s.alpha0 = 0.0;
  s.components.resize(grids.size());
  for (std::size_t i = 0; i < grids.size(); ++i) {
    const knot_grid& g = grids[i];
    spline_component& c = s.components[i];
    c.alpha.setZero();
    c.psi = Eigen::VectorXd::Zero(g.k_max);
    c.gamma.resize(g.k_max);
    for (int k = 0; k < g.k_max; ++k) c.gamma[k] = g.midpoint(k);
    c.zeta.assign(g.k_max, 0);
    c.lambda = std::clamp(lambda_init, 0, g.k_max);
  }
  return s;
}

double component_eta(const spline_component& c, double z) {
  double value = z * (c.alpha[0] + z * (c.alpha[1] + z * c.alpha[2]));
  for (int k = 0; k < c.k_max(); ++k) {
    if (c.zeta[k]) value += c.psi[k] * truncated_cubic(z, c.gamma[k]);
  }
  return value;
}

double evaluate_eta(const calibration_state& s, const Eigen::VectorXd& x) {
  if (x.size() != s.n_covariates()) {
    throw std::invalid_argument("evaluate_eta: covariate dimension mismatch");
  }
  double eta = s.alpha0;
  for (int i = 0; i < s.n_covariates(); ++i) {
    eta += component_eta(s.components[i], x[i]);
  }
  return eta;
}

copula_parameter evaluate_theta(const calibration_state& s,
                                const Eigen::VectorXd& x,
                                copula_family family) {
  return {family, link_inverse(family, evaluate_eta(s, x))};
}

double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
         std::lgamma(n - k + 1.0);
}

double truncated_poisson_log_pmf(int m, int lambda, int k_max) {
  if (m < 0 || m > k_max) return neg_inf;
  if (lambda == 0) return m == 0 ? 0.0 : neg_inf;  // 0^0 = 1 convention
  const double log_lambda = std::log(static_cast<double>(lambda));
  double log_norm = neg_inf;
  for (int j = 0; j <= k_max; ++j) {
    log_norm =
        log_sum_exp(log_norm, j * log_lambda - std::lgamma(j + 1.0));
  }
  return m * log_lambda - std::lgamma(m + 1.0) - log_norm;
}

double binomial_log_pmf(int k, int n, double p) {
  if (k < 0 || k > n) return neg_inf;
  if (p <= 0.0) return k == 0 ? 0.0 : neg_inf;
  if (p >= 1.0) return k == n ? 0.0 : neg_inf;
  return log_choose(n, k) + k * std::log(p) + (n - k) * std::log1p(-p);
}

int sample_truncated_poisson(rng& gen, int lambda, int k_max) {
  const double u = gen.uniform();
  double cum = 0.0;
  for (int m = 0; m <= k_max; ++m) {
    cum += std::exp(truncated_poisson_log_pmf(m, lambda, k_max));
    if (u <= cum) return m;
  }
  return k_max;  // guards against rounding of the cumulative sum
}

calibration_state sample_prior_calibration(rng& gen,
                                           const std::vector<knot_grid>& grids,
                                           const spline_prior& prior) {
  calibration_state s;
  s.alpha0 = gen.normal(0.0, prior.coef_sd);
  s.components.resize(grids.size());
  for (std::size_t i = 0; i < grids.size(); ++i) {
    const knot_grid& g = grids[i];
    spline_component& c = s.components[i];
    for (int j = 0; j < 3; ++j) c.alpha[j] = gen.normal(0.0, prior.coef_sd);
    c.psi.resize(g.k_max);
    c.gamma.resize(g.k_max);
    for (int k = 0; k < g.k_max; ++k) {
      c.psi[k] = gen.normal(0.0, prior.coef_sd);
      const auto [a, b] = g.interval(k);
      c.gamma[k] = gen.uniform(a, b);
    }
    c.lambda = gen.binomial(g.k_max, prior.lambda_p);
    const int m = sample_truncated_poisson(gen, c.lambda, g.k_max);
    // Uniform size-m configuration via a partial shuffle.
    std::vector<int> idx(g.k_max);
    for (int k = 0; k < g.k_max; ++k) idx[k] = k;
    c.zeta.assign(g.k_max, 0);
    for (int k = 0; k < m; ++k) {
      const std::size_t j = k + gen.uniform_int(g.k_max - k);
      std::swap(idx[k], idx[j]);
      c.zeta[idx[k]] = 1;
    }
  }
  return s;
}

std::vector<double> sample_prior_curve(rng& gen,
                                       const std::vector<double>& grid,
                                       int k_max, copula_family family,
                                       const spline_prior& prior) {
  if (grid.size() < 2) {
    throw std::invalid_argument("sample_prior_curve needs a grid");
  }
  const auto [lo_it, hi_it] = std::minmax_element(grid.begin(), grid.end());
  knot_grid g{*lo_it, *hi_it, k_max};
  const calibration_state s = sample_prior_calibration(gen, {g}, prior);

  std::vector<double> taus;
  taus.reserve(grid.size());
  Eigen::VectorXd x(1);
  for (double z : grid) {
    x[0] = z;
    const copula_parameter p = evaluate_theta(s, x, family);
    taus.push_back(theta_to_tau(p.family(), p.theta()));
  }
  return taus;
}

}  // namespace copcal
