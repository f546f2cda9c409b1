#include "copcal/mcmc.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "copcal/math_util.hpp"

namespace copcal {

namespace {

// Accepted/attempted counts, kept separately for the burn-in phase (0) and
// the retained phase (1); reported rates use the retained phase only.
struct counter {
  std::uint64_t acc[2] = {0, 0};
  std::uint64_t att[2] = {0, 0};
  void hit(int phase, bool accepted) {
    ++att[phase];
    if (accepted) ++acc[phase];
  }
};

class gibbs_sampler {
 public:
  gibbs_sampler(const model_spec& spec, const model_data& d,
                const mcmc_options& opt)
      : spec_(spec),
        d_(d),
        opt_(opt),
        gen_(opt.seed),
        use_marg_(opt.mode != likelihood_mode::prior_only),
        use_cop_(opt.mode == likelihood_mode::full),
        coef_sd_(std::sqrt(spec.coef_prior_var)) {
    if (opt_.burn_in < 0 || opt_.burn_in >= opt_.iterations) {
      throw std::invalid_argument("burn-in must lie in [0, iterations)");
    }
    if (opt_.thin < 1) throw std::invalid_argument("thin must be >= 1");
    if (opt_.adapt_window < 1) {
      throw std::invalid_argument("adapt window must be >= 1");
    }
    if (opt_.beta_im_prob < 0.0 || opt_.beta_im_prob > 1.0) {
      throw std::invalid_argument("beta IM probability must lie in [0, 1]");
    }
  }

  mcmc_trace run();

 private:
  const model_spec& spec_;
  const model_data& d_;
  mcmc_options opt_;
  rng gen_;
  bool use_marg_, use_cop_;
  double coef_sd_;

  conjugate_cache conj_[2];
  chain_state st_;
  Eigen::VectorXd u_[2];
  double ssr_[2] = {0.0, 0.0};
  double marg_ll_[2] = {0.0, 0.0};
  Eigen::VectorXd poly_part_;
  std::vector<Eigen::VectorXd> spline_part_;
  Eigen::VectorXd eta_;
  double cop_ll_ = 0.0;

  double beta_scale_[2] = {0.0, 0.0};
  double alpha_scale_ = 0.0;
  std::vector<double> psi_scale_;

  counter c_beta_im_[2], c_beta_rwm_[2], c_sigma_[2], c_alpha_;
  std::vector<counter> c_zeta_, c_psi_, c_gamma_, c_lambda_;
  counter w_beta_[2], w_alpha_;
  std::vector<counter> w_psi_;
  int t_beta_[2] = {0, 0};
  int t_alpha_ = 0;
  std::vector<int> t_psi_;
  int phase_ = 0;

  const Eigen::VectorXd& y(int i) const { return i == 0 ? d_.y1 : d_.y2; }
  marginal_state& marg(int i) { return i == 0 ? st_.marg1 : st_.marg2; }

  bool accept(double log_ratio) {
    return std::log(gen_.uniform()) < log_ratio;
  }

  double marg_formula(double ssr, double sigma) const {
    const double n = static_cast<double>(d_.n());
    return -n * (0.9189385332046727 + std::log(sigma)) -
           ssr / (2.0 * sigma * sigma);
  }

  double beta_log_prior(const Eigen::VectorXd& b, double sigma) const {
    double lp = 0.0;
    for (int j = 0; j < b.size(); ++j) lp += norm_log_pdf(b[j], 0.0, sigma);
    return lp;
  }

  double cop_with(const Eigen::VectorXd& eta, const Eigen::VectorXd& u1,
                  const Eigen::VectorXd& u2) const {
    return copula_loglik(spec_.family, eta, u1, u2);
  }

  Eigen::VectorXd spline_values(int i, const spline_component& c) const {
    const int n = d_.n();
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < c.k_max(); ++k) {
      if (!c.zeta[k]) continue;
      const double psi = c.psi[k];
      const double knot = c.gamma[k];
      for (int j = 0; j < n; ++j) {
        s[j] += psi * truncated_cubic(d_.z(j, i), knot);
      }
    }
    return s;
  }

  Eigen::VectorXd poly_values(double alpha0,
                              const std::vector<Eigen::Vector3d>& alphas) const {
    const int n = d_.n();
    Eigen::VectorXd pvec = Eigen::VectorXd::Constant(n, alpha0);
    for (int i = 0; i < static_cast<int>(alphas.size()); ++i) {
      const Eigen::Vector3d& a = alphas[i];
      for (int j = 0; j < n; ++j) {
        const double z = d_.z(j, i);
        pvec[j] += z * (a[0] + z * (a[1] + z * a[2]));
      }
    }
    return pvec;
  }

  std::vector<Eigen::Vector3d> current_alphas() const {
    std::vector<Eigen::Vector3d> a(st_.calib.n_covariates());
    for (int i = 0; i < st_.calib.n_covariates(); ++i) {
      a[i] = st_.calib.components[i].alpha;
    }
    return a;
  }

  void init();
  void sweep();
  void update_beta(int i);
  void update_sigma(int i);
  void update_alpha();
  void update_zeta(int i);
  void update_psi(int i);
  void update_gamma(int i);
  void update_lambda(int i);
  void maybe_adapt(int iter);

  // Diminishing adaptation: the first window doubles or halves the scale and
  // later windows make smaller multiplicative moves, but the step is floored
  // at x1.10 so the tuner can still track a late change of regime (e.g. the
  // spline coefficients tightening once knots engage with the data).  Blocks
  // attempted on only a fraction of iterations keep accumulating until the
  // window holds enough attempts for a usable rate estimate.
  static void tune(double& scale, counter& w, int& evals, double lo,
                   double hi) {
    constexpr int min_window_attempts = 15;
    if (w.att[0] < min_window_attempts) return;
    const double r =
        static_cast<double>(w.acc[0]) / static_cast<double>(w.att[0]);
    const double step =
        std::max(1.10, std::pow(2.0, 1.0 / (1.0 + 0.15 * evals)));
    if (r < lo) {
      scale /= step;
    } else if (r > hi) {
      scale *= step;
    }
    scale = std::clamp(scale, 1e-5, 50.0);
    ++evals;
    w = counter{};
  }
};

void gibbs_sampler::init() {
  const int q = d_.n_covariates();
  spline_part_.assign(q, Eigen::VectorXd());
  psi_scale_.assign(q, opt_.psi_scale);
  t_psi_.assign(q, 0);
  c_zeta_.resize(q);
  c_psi_.resize(q);
  c_gamma_.resize(q);
  c_lambda_.resize(q);
  w_psi_.resize(q);
  beta_scale_[0] = beta_scale_[1] = opt_.beta_scale;
  alpha_scale_ = opt_.alpha_scale;

  for (int i = 0; i < 2; ++i) {
    conj_[i] = make_conjugate_cache(d_.design, y(i));
    marg(i) = draw_conjugate_marginal(spec_, conj_[i], d_.n(), gen_);
    ssr_[i] = (y(i) - d_.design * marg(i).beta).squaredNorm();
    marg_ll_[i] = marg_formula(ssr_[i], marg(i).sigma);
  }
  st_.calib = make_initial_calibration(d_.grids, spec_.k_max / 2);
  if (opt_.fixed_lambda >= 0) {
    for (auto& c : st_.calib.components) {
      c.lambda = std::min(opt_.fixed_lambda, c.k_max());
    }
  }
  poly_part_ = poly_values(st_.calib.alpha0, current_alphas());
  eta_ = poly_part_;
  for (int i = 0; i < q; ++i) {
    spline_part_[i] = spline_values(i, st_.calib.components[i]);
    eta_ += spline_part_[i];
  }
  if (use_cop_) {
    for (int i = 0; i < 2; ++i) u_[i] = pit_residuals(d_, y(i), marg(i));
    cop_ll_ = cop_with(eta_, u_[0], u_[1]);
  }
  double total = log_prior(spec_, d_, st_);
  if (use_marg_) total += marg_ll_[0] + marg_ll_[1];
  if (use_cop_) total += cop_ll_;
  if (!std::isfinite(total)) {
    throw std::runtime_error("initial log posterior is not finite");
  }
}

void gibbs_sampler::update_beta(int i) {
  marginal_state& m = marg(i);
  const int dd = d_.design_dim();
  const bool is_im = gen_.bernoulli(opt_.beta_im_prob);

  Eigen::VectorXd prop(dd);
  if (is_im) {
    Eigen::VectorXd zv(dd);
    for (int j = 0; j < dd; ++j) zv[j] = gen_.normal();
    prop = conj_[i].mu + m.sigma * conj_[i].llt.matrixU().solve(zv);
  } else {
    prop = m.beta;
    for (int j = 0; j < dd; ++j) prop[j] += beta_scale_[i] * gen_.normal();
  }

  const double ssr_p = (y(i) - d_.design * prop).squaredNorm();
  double lr = beta_log_prior(prop, m.sigma) - beta_log_prior(m.beta, m.sigma);
  double marg_p = 0.0;
  if (use_marg_) {
    marg_p = marg_formula(ssr_p, m.sigma);
    lr += marg_p - marg_ll_[i];
  }
  Eigen::VectorXd u_p;
  double cop_p = 0.0;
  if (use_cop_) {
    const marginal_state tmp{prop, m.sigma};
    u_p = pit_residuals(d_, y(i), tmp);
    cop_p = i == 0 ? cop_with(eta_, u_p, u_[1]) : cop_with(eta_, u_[0], u_p);
    lr += cop_p - cop_ll_;
  }
  if (is_im) {
    // Independent proposal: q(current)/q(proposed) reduces to the
    // difference of Gaussian quadratic forms (shared mean and covariance).
    lr += (conj_[i].quad(prop) - conj_[i].quad(m.beta)) /
          (2.0 * m.sigma * m.sigma);
  }

  const bool ok = accept(lr);
  (is_im ? c_beta_im_[i] : c_beta_rwm_[i]).hit(phase_, ok);
  if (!is_im && phase_ == 0) w_beta_[i].hit(0, ok);
  if (ok) {
    m.beta = std::move(prop);
    ssr_[i] = ssr_p;
    if (use_marg_) marg_ll_[i] = marg_p;
    if (use_cop_) {
      u_[i] = std::move(u_p);
      cop_ll_ = cop_p;
    }
  }
}

void gibbs_sampler::update_sigma(int i) {
  marginal_state& m = marg(i);
  const double a_star =
      spec_.sigma_prior_shape + 0.5 * (d_.design_dim() + d_.n());
  const double b_star =
      spec_.sigma_prior_rate + 0.5 * (m.beta.squaredNorm() + ssr_[i]);
  const double s2_cur = m.sigma * m.sigma;
  const double s2_prop = gen_.inverse_gamma(a_star, b_star);
  const double sigma_p = std::sqrt(s2_prop);

  double lr = inverse_gamma_log_pdf(s2_prop, spec_.sigma_prior_shape,
                                    spec_.sigma_prior_rate) -
              inverse_gamma_log_pdf(s2_cur, spec_.sigma_prior_shape,
                                    spec_.sigma_prior_rate) +
              beta_log_prior(m.beta, sigma_p) -
              beta_log_prior(m.beta, m.sigma);
  double marg_p = 0.0;
  if (use_marg_) {
    marg_p = marg_formula(ssr_[i], sigma_p);
    lr += marg_p - marg_ll_[i];
  }
  Eigen::VectorXd u_p;
  double cop_p = 0.0;
  if (use_cop_) {
    const marginal_state tmp{m.beta, sigma_p};
    u_p = pit_residuals(d_, y(i), tmp);
    cop_p = i == 0 ? cop_with(eta_, u_p, u_[1]) : cop_with(eta_, u_[0], u_p);
    lr += cop_p - cop_ll_;
  }
  lr += inverse_gamma_log_pdf(s2_cur, a_star, b_star) -
        inverse_gamma_log_pdf(s2_prop, a_star, b_star);

  const bool ok = accept(lr);
  c_sigma_[i].hit(phase_, ok);
  if (ok) {
    m.sigma = sigma_p;
    if (use_marg_) marg_ll_[i] = marg_p;
    if (use_cop_) {
      u_[i] = std::move(u_p);
      cop_ll_ = cop_p;
    }
  }
}

void gibbs_sampler::update_alpha() {
  const int q = st_.calib.n_covariates();
  const double a0_p = st_.calib.alpha0 + alpha_scale_ * gen_.normal();
  std::vector<Eigen::Vector3d> a_p(q);
  double lr = norm_log_pdf(a0_p, 0.0, coef_sd_) -
              norm_log_pdf(st_.calib.alpha0, 0.0, coef_sd_);
  for (int i = 0; i < q; ++i) {
    const Eigen::Vector3d& cur = st_.calib.components[i].alpha;
    for (int j = 0; j < 3; ++j) {
      a_p[i][j] = cur[j] + alpha_scale_ * gen_.normal();
      lr += norm_log_pdf(a_p[i][j], 0.0, coef_sd_) -
            norm_log_pdf(cur[j], 0.0, coef_sd_);
    }
  }

  Eigen::VectorXd poly_p, eta_p;
  double cop_p = 0.0;
  if (use_cop_) {
    poly_p = poly_values(a0_p, a_p);
    eta_p = poly_p;
    for (int i = 0; i < q; ++i) eta_p += spline_part_[i];
    cop_p = cop_with(eta_p, u_[0], u_[1]);
    lr += cop_p - cop_ll_;
  }

  const bool ok = accept(lr);
  c_alpha_.hit(phase_, ok);
  if (phase_ == 0) w_alpha_.hit(0, ok);
  if (ok) {
    st_.calib.alpha0 = a0_p;
    for (int i = 0; i < q; ++i) st_.calib.components[i].alpha = a_p[i];
    if (use_cop_) {
      poly_part_ = std::move(poly_p);
      eta_ = std::move(eta_p);
      cop_ll_ = cop_p;
    }
  }
}

void gibbs_sampler::update_zeta(int i) {
  spline_component& c = st_.calib.components[i];
  const int K = c.k_max();
  std::vector<int> zp = c.zeta;

  if (gen_.bernoulli(0.5)) {
    const int k = static_cast<int>(gen_.uniform_int(K));
    zp[k] = 1 - zp[k];
  } else {
    if (K < 2) {
      c_zeta_[i].hit(phase_, true);
      return;
    }
    const int k1 = static_cast<int>(gen_.uniform_int(K));
    int k2 = static_cast<int>(gen_.uniform_int(K - 1));
    if (k2 >= k1) ++k2;
    if (zp[k1] == zp[k2]) {  // equal-valued swap: accepted no-op
      c_zeta_[i].hit(phase_, true);
      return;
    }
    std::swap(zp[k1], zp[k2]);
  }

  const int m_cur = c.active_count();
  int m_p = 0;
  for (int zk : zp) m_p += zk;
  double lr =
      (truncated_poisson_log_pmf(m_p, c.lambda, K) - log_choose(K, m_p)) -
      (truncated_poisson_log_pmf(m_cur, c.lambda, K) - log_choose(K, m_cur));

  Eigen::VectorXd s_p, eta_p;
  double cop_p = 0.0;
  if (use_cop_) {
    spline_component tmp = c;
    tmp.zeta = zp;
    s_p = spline_values(i, tmp);
    eta_p = eta_ - spline_part_[i] + s_p;
    cop_p = cop_with(eta_p, u_[0], u_[1]);
    lr += cop_p - cop_ll_;
  }

  const bool ok = accept(lr);
  c_zeta_[i].hit(phase_, ok);
  if (ok) {
    c.zeta = std::move(zp);
    if (use_cop_) {
      spline_part_[i] = std::move(s_p);
      eta_ = std::move(eta_p);
      cop_ll_ = cop_p;
    }
  }
}

void gibbs_sampler::update_psi(int i) {
  spline_component& c = st_.calib.components[i];
  const int K = c.k_max();

  std::vector<int> active;
  for (int k = 0; k < K; ++k) {
    if (c.zeta[k]) active.push_back(k);
  }
  if (!active.empty()) {
    // All active coefficients move jointly; dividing the step by sqrt(m)
    // keeps the acceptance rate roughly independent of how many knots are
    // active, so the scale tuned during burn-in stays valid when the active
    // set changes size.
    const double step_sd =
        psi_scale_[i] / std::sqrt(static_cast<double>(active.size()));
    Eigen::VectorXd psi_p = c.psi;
    double lr = 0.0;
    for (int k : active) {
      psi_p[k] = c.psi[k] + step_sd * gen_.normal();
      lr += norm_log_pdf(psi_p[k], 0.0, coef_sd_) -
            norm_log_pdf(c.psi[k], 0.0, coef_sd_);
    }

    Eigen::VectorXd s_p, eta_p;
    double cop_p = 0.0;
    if (use_cop_) {
      spline_component tmp = c;
      tmp.psi = psi_p;
      s_p = spline_values(i, tmp);
      eta_p = eta_ - spline_part_[i] + s_p;
      cop_p = cop_with(eta_p, u_[0], u_[1]);
      lr += cop_p - cop_ll_;
    }

    const bool ok = accept(lr);
    c_psi_[i].hit(phase_, ok);
    if (phase_ == 0) w_psi_[i].hit(0, ok);
    if (ok) {
      c.psi = std::move(psi_p);
      if (use_cop_) {
        spline_part_[i] = std::move(s_p);
        eta_ = std::move(eta_p);
        cop_ll_ = cop_p;
      }
    }
  }

  // Pseudo-prior refresh of inactive coefficients, accepted by definition;
  // does not touch the likelihood since their basis terms are switched off.
  for (int k = 0; k < K; ++k) {
    if (!c.zeta[k]) c.psi[k] = gen_.normal(0.0, coef_sd_);
  }
}

void gibbs_sampler::update_gamma(int i) {
  spline_component& c = st_.calib.components[i];
  const knot_grid& g = d_.grids[i];
  for (int k = 0; k < c.k_max(); ++k) {
    const auto [a, b] = g.interval(k);
    if (!c.zeta[k]) {
      c.gamma[k] = gen_.uniform(a, b);
      continue;
    }
    // Active knot: IM with the uniform prior as proposal; prior and
    // proposal cancel, leaving the likelihood ratio.
    const double gamma_p = gen_.uniform(a, b);
    double lr = 0.0;
    Eigen::VectorXd s_p, eta_p;
    double cop_p = 0.0;
    if (use_cop_) {
      spline_component tmp = c;
      tmp.gamma[k] = gamma_p;
      s_p = spline_values(i, tmp);
      eta_p = eta_ - spline_part_[i] + s_p;
      cop_p = cop_with(eta_p, u_[0], u_[1]);
      lr = cop_p - cop_ll_;
    }
    const bool ok = accept(lr);
    c_gamma_[i].hit(phase_, ok);
    if (ok) {
      c.gamma[k] = gamma_p;
      if (use_cop_) {
        spline_part_[i] = std::move(s_p);
        eta_ = std::move(eta_p);
        cop_ll_ = cop_p;
      }
    }
  }
}

void gibbs_sampler::update_lambda(int i) {
  if (opt_.fixed_lambda >= 0) return;
  spline_component& c = st_.calib.components[i];
  const int K = c.k_max();
  const int lambda_p = gen_.binomial(K, spec_.lambda_binomial_p);
  const int m = c.active_count();
  // IM with the binomial prior as proposal: prior and proposal cancel,
  // leaving the ratio of truncated-Poisson masses of the current |zeta|.
  const double lr = truncated_poisson_log_pmf(m, lambda_p, K) -
                    truncated_poisson_log_pmf(m, c.lambda, K);
  const bool ok = accept(lr);
  c_lambda_[i].hit(phase_, ok);
  if (ok) c.lambda = lambda_p;
}

void gibbs_sampler::sweep() {
  update_beta(0);
  update_beta(1);
  update_sigma(0);
  update_sigma(1);
  update_alpha();
  for (int i = 0; i < d_.n_covariates(); ++i) {
    if (!opt_.fix_zeta) update_zeta(i);
    update_psi(i);
    update_gamma(i);
    update_lambda(i);
  }
}

void gibbs_sampler::maybe_adapt(int iter) {
  if (!opt_.adapt || iter % opt_.adapt_window != 0) return;
  tune(beta_scale_[0], w_beta_[0], t_beta_[0], beta_target_lo, beta_target_hi);
  tune(beta_scale_[1], w_beta_[1], t_beta_[1], beta_target_lo, beta_target_hi);
  tune(alpha_scale_, w_alpha_, t_alpha_, alpha_target_lo, alpha_target_hi);
  for (std::size_t i = 0; i < w_psi_.size(); ++i) {
    tune(psi_scale_[i], w_psi_[i], t_psi_[i], psi_target_lo, psi_target_hi);
  }
}

mcmc_trace gibbs_sampler::run() {
  init();

  mcmc_trace trace;
  trace.layout = trace_layout{d_.design_dim(), d_.n_covariates(), spec_.k_max};
  trace.seed = opt_.seed;
  trace.spec = spec_;
  trace.options = opt_;

  const int span = opt_.iterations - opt_.burn_in;
  const int kept = (span + opt_.thin - 1) / opt_.thin;
  trace.draws.resize(kept, trace.layout.n_columns());

  int row = 0;
  for (int it = 1; it <= opt_.iterations; ++it) {
    phase_ = it > opt_.burn_in ? 1 : 0;
    sweep();
    if (phase_ == 0) {
      maybe_adapt(it);
    } else if ((it - opt_.burn_in - 1) % opt_.thin == 0) {
      trace.layout.write_row(trace.draws.row(row++), st_);
    }
  }

  auto push = [&](const std::string& name, const counter& c, double scale) {
    trace.acceptance.push_back(block_stat{name, c.acc[1], c.att[1], scale});
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < 2; ++i) {
    const std::string tag = std::to_string(i + 1);
    push("beta" + tag + "_im", c_beta_im_[i], nan);
    push("beta" + tag + "_rwm", c_beta_rwm_[i], beta_scale_[i]);
  }
  push("sigma1", c_sigma_[0], nan);
  push("sigma2", c_sigma_[1], nan);
  push("alpha", c_alpha_, alpha_scale_);
  for (int i = 0; i < d_.n_covariates(); ++i) {
    const std::string tag = std::to_string(i + 1);
    push("zeta_" + tag, c_zeta_[i], nan);
    push("psi_" + tag, c_psi_[i], psi_scale_[i]);
    push("gamma_" + tag, c_gamma_[i], nan);
    push("lambda_" + tag, c_lambda_[i], nan);
  }
  return trace;
}

}  // namespace

std::vector<std::string> trace_layout::column_names() const {
  std::vector<std::string> names(n_columns());
  for (int o = 0; o < 2; ++o) {
    for (int j = 0; j < design_dim; ++j) {
      names[beta(o, j)] =
          "beta" + std::to_string(o + 1) + "_" + std::to_string(j);
    }
    names[sigma(o)] = "sigma" + std::to_string(o + 1);
  }
  names[alpha0()] = "alpha0";
  for (int i = 0; i < n_cov; ++i) {
    const std::string tag = std::to_string(i + 1) + "_";
    for (int j = 0; j < 3; ++j) {
      names[alpha(i, j)] = "alpha_" + tag + std::to_string(j + 1);
    }
    for (int k = 0; k < k_max; ++k) {
      const std::string kk = std::to_string(k + 1);
      names[psi(i, k)] = "psi_" + tag + kk;
      names[gamma(i, k)] = "gamma_" + tag + kk;
      names[zeta(i, k)] = "zeta_" + tag + kk;
    }
    names[lambda(i)] = "lambda_" + std::to_string(i + 1);
  }
  return names;
}

void trace_layout::write_row(
    Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row,
    const chain_state& s) const {
  const marginal_state* margs[2] = {&s.marg1, &s.marg2};
  for (int o = 0; o < 2; ++o) {
    for (int j = 0; j < design_dim; ++j) row[beta(o, j)] = margs[o]->beta[j];
    row[sigma(o)] = margs[o]->sigma;
  }
  row[alpha0()] = s.calib.alpha0;
  for (int i = 0; i < n_cov; ++i) {
    const spline_component& c = s.calib.components[i];
    for (int j = 0; j < 3; ++j) row[alpha(i, j)] = c.alpha[j];
    for (int k = 0; k < k_max; ++k) {
      row[psi(i, k)] = c.psi[k];
      row[gamma(i, k)] = c.gamma[k];
      row[zeta(i, k)] = static_cast<double>(c.zeta[k]);
    }
    row[lambda(i)] = static_cast<double>(c.lambda);
  }
}

chain_state trace_layout::read_state(const Eigen::RowVectorXd& row) const {
  chain_state s;
  marginal_state* margs[2] = {&s.marg1, &s.marg2};
  for (int o = 0; o < 2; ++o) {
    margs[o]->beta.resize(design_dim);
    for (int j = 0; j < design_dim; ++j) margs[o]->beta[j] = row[beta(o, j)];
    margs[o]->sigma = row[sigma(o)];
  }
  s.calib.alpha0 = row[alpha0()];
  s.calib.components.resize(n_cov);
  for (int i = 0; i < n_cov; ++i) {
    spline_component& c = s.calib.components[i];
    c.psi.resize(k_max);
    c.gamma.resize(k_max);
    c.zeta.assign(k_max, 0);
    for (int j = 0; j < 3; ++j) c.alpha[j] = row[alpha(i, j)];
    for (int k = 0; k < k_max; ++k) {
      c.psi[k] = row[psi(i, k)];
      c.gamma[k] = row[gamma(i, k)];
      c.zeta[k] = row[zeta(i, k)] > 0.5 ? 1 : 0;
    }
    c.lambda = static_cast<int>(std::lround(row[lambda(i)]));
  }
  return s;
}

mcmc_trace run_chain(const model_spec& spec, const model_data& d,
                     const mcmc_options& options) {
  gibbs_sampler sampler(spec, d, options);
  return sampler.run();
}

void write_trace_csv(const mcmc_trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const auto names = trace.layout.column_names();
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (j) out << ',';
    out << names[j];
  }
  out << '\n';
  for (int r = 0; r < trace.draws.rows(); ++r) {
    for (int j = 0; j < trace.draws.cols(); ++j) {
      if (j) out << ',';
      out << format_double(trace.draws(r, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

Eigen::MatrixXd read_trace_csv(const std::string& path,
                               const trace_layout& layout) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto expected = layout.column_names();
  {
    std::stringstream ss(line);
    std::string field;
    std::size_t j = 0;
    while (std::getline(ss, field, ',')) {
      if (j >= expected.size() || field != expected[j]) {
        throw std::runtime_error(path + ": trace header does not match the "
                                        "model layout at column " +
                                 std::to_string(j + 1));
      }
      ++j;
    }
    if (j != expected.size()) {
      throw std::runtime_error(path + ": trace header has wrong column count");
    }
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(expected.size());
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) row.push_back(std::stod(field));
    if (row.size() != expected.size()) {
      throw std::runtime_error(path + ": trace row has wrong field count");
    }
    rows.push_back(std::move(row));
  }

  Eigen::MatrixXd draws(static_cast<int>(rows.size()),
                        static_cast<int>(expected.size()));
  for (int r = 0; r < draws.rows(); ++r) {
    for (int j = 0; j < draws.cols(); ++j) draws(r, j) = rows[r][j];
  }
  return draws;
}

}  // namespace copcal
