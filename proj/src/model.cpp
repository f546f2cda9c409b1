#include "copcal/model.hpp"

#include <stdexcept>

#include "copcal/math_util.hpp"

namespace copcal {

namespace {
constexpr double pit_clamp = 1e-12;
}

model_data prepare_model_data(const dataset& raw, const model_spec& spec) {
  if (spec.covariates.empty()) {
    throw std::invalid_argument("model requires at least one covariate");
  }
  for (int c : spec.covariates) {
    if (c < 0 || c >= raw.p()) {
      throw std::invalid_argument("covariate index " + std::to_string(c + 1) +
                                  " out of range for dataset with p = " +
                                  std::to_string(raw.p()));
    }
  }
  const int n = raw.n();
  const int q = spec.n_covariates();

  Eigen::MatrixXd selected(n, q);
  for (int j = 0; j < q; ++j) selected.col(j) = raw.x.col(spec.covariates[j]);

  model_data d;
  d.y1 = raw.y1;
  d.y2 = raw.y2;
  d.map = fit_standardization(selected);
  d.z = d.map.apply(selected);
  d.design.resize(n, q + 1);
  d.design.col(0).setOnes();
  d.design.rightCols(q) = d.z;
  d.grids.assign(q, knot_grid{-1.0, 1.0, spec.k_max});
  d.data_hash = dataset_hash(raw);
  return d;
}

double marginal_loglik(const model_data& d, const Eigen::VectorXd& y,
                       const marginal_state& m) {
  const double ssr = (y - d.design * m.beta).squaredNorm();
  const double n = static_cast<double>(d.n());
  return -n * (0.9189385332046727 + std::log(m.sigma)) -
         ssr / (2.0 * m.sigma * m.sigma);
}

Eigen::VectorXd pit_residuals(const model_data& d, const Eigen::VectorXd& y,
                              const marginal_state& m) {
  Eigen::VectorXd u = (y - d.design * m.beta) / m.sigma;
  for (int j = 0; j < u.size(); ++j) {
    u[j] = std::clamp(norm_cdf(u[j]), pit_clamp, 1.0 - pit_clamp);
  }
  return u;
}

Eigen::VectorXd eta_values(const model_data& d, const calibration_state& s) {
  const int n = d.n();
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, s.alpha0);
  for (int i = 0; i < s.n_covariates(); ++i) {
    const spline_component& c = s.components[i];
    for (int j = 0; j < n; ++j) eta[j] += component_eta(c, d.z(j, i));
  }
  return eta;
}

double copula_loglik(copula_family family, const Eigen::VectorXd& eta,
                     const Eigen::VectorXd& u1, const Eigen::VectorXd& u2) {
  double total = 0.0;
  for (int j = 0; j < eta.size(); ++j) {
    const copula_parameter p(family, link_inverse(family, eta[j]));
    total += copula_log_density(p, u1[j], u2[j]);
  }
  return total;
}

double joint_loglik(const model_spec& spec, const model_data& d,
                    const chain_state& s) {
  const double marg = marginal_loglik(d, d.y1, s.marg1) +
                      marginal_loglik(d, d.y2, s.marg2);
  const Eigen::VectorXd u1 = pit_residuals(d, d.y1, s.marg1);
  const Eigen::VectorXd u2 = pit_residuals(d, d.y2, s.marg2);
  return marg + copula_loglik(spec.family, eta_values(d, s.calib), u1, u2);
}

double inverse_gamma_log_pdf(double x, double shape, double rate) {
  if (x <= 0.0) return neg_inf;
  return shape * std::log(rate) - std::lgamma(shape) -
         (shape + 1.0) * std::log(x) - rate / x;
}

double log_prior(const model_spec& spec, const model_data& d,
                 const chain_state& s) {
  const double coef_sd = std::sqrt(spec.coef_prior_var);
  double lp = 0.0;

  for (const marginal_state* m : {&s.marg1, &s.marg2}) {
    if (!(m->sigma > 0.0)) return neg_inf;
    const double sigma_sq = m->sigma * m->sigma;
    lp += inverse_gamma_log_pdf(sigma_sq, spec.sigma_prior_shape,
                                spec.sigma_prior_rate);
    for (int j = 0; j < m->beta.size(); ++j) {
      lp += norm_log_pdf(m->beta[j], 0.0, m->sigma);
    }
  }

  lp += norm_log_pdf(s.calib.alpha0, 0.0, coef_sd);
  for (int i = 0; i < s.calib.n_covariates(); ++i) {
    const spline_component& c = s.calib.components[i];
    const knot_grid& g = d.grids[i];
    if (c.lambda < 0 || c.lambda > g.k_max) return neg_inf;
    for (int j = 0; j < 3; ++j) lp += norm_log_pdf(c.alpha[j], 0.0, coef_sd);
    for (int k = 0; k < g.k_max; ++k) {
      lp += norm_log_pdf(c.psi[k], 0.0, coef_sd);
      if (!g.contains(k, c.gamma[k])) return neg_inf;
      lp -= std::log(g.interval_width());
      if (c.zeta[k] != 0 && c.zeta[k] != 1) return neg_inf;
    }
    const int m = c.active_count();
    lp += truncated_poisson_log_pmf(m, c.lambda, g.k_max) -
          log_choose(g.k_max, m);
    lp += binomial_log_pmf(c.lambda, g.k_max, spec.lambda_binomial_p);
  }
  return lp;
}

conjugate_cache make_conjugate_cache(const Eigen::MatrixXd& design,
                                     const Eigen::VectorXd& y) {
  conjugate_cache c;
  const int d = static_cast<int>(design.cols());
  c.lambda_mat = Eigen::MatrixXd::Identity(d, d) + design.transpose() * design;
  c.llt.compute(c.lambda_mat);
  c.mu = c.llt.solve(design.transpose() * y);
  c.yty = y.squaredNorm();
  c.mu_quad = c.mu.dot(c.lambda_mat * c.mu);
  return c;
}

marginal_state draw_conjugate_marginal(const model_spec& spec,
                                       const conjugate_cache& c, int n,
                                       rng& gen) {
  // sigma^2 | y ~ IG(shape + n/2, rate + (y'y - mu' Lambda mu)/2), then
  // beta | sigma^2, y ~ N(mu, sigma^2 Lambda^-1).
  const double shape = spec.sigma_prior_shape + 0.5 * n;
  const double rate = spec.sigma_prior_rate + 0.5 * (c.yty - c.mu_quad);
  const double sigma_sq = gen.inverse_gamma(shape, rate);

  const int d = static_cast<int>(c.mu.size());
  Eigen::VectorXd zvec(d);
  for (int j = 0; j < d; ++j) zvec[j] = gen.normal();
  marginal_state m;
  m.sigma = std::sqrt(sigma_sq);
  m.beta = c.mu + m.sigma * c.llt.matrixU().solve(zvec);
  return m;
}

}  // namespace copcal
