#include "copcal/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "copcal/math_util.hpp"
#include "copcal/rng.hpp"

namespace copcal {

namespace {

// Decode every kept draw once; curve evaluation then loops grid points per
// state without re-parsing trace rows.
std::vector<chain_state> decode_states(const trace_layout& layout,
                                       const Eigen::MatrixXd& draws) {
  std::vector<chain_state> states;
  states.reserve(static_cast<std::size_t>(draws.rows()));
  for (Eigen::Index m = 0; m < draws.rows(); ++m) {
    states.push_back(layout.read_state(draws.row(m)));
  }
  return states;
}

double transform_eta(double eta, curve_scale scale, copula_family family) {
  switch (scale) {
    case curve_scale::eta:
      return eta;
    case curve_scale::theta:
      return link_inverse(family, eta);
    case curve_scale::tau:
      return theta_to_tau(family, link_inverse(family, eta));
  }
  throw std::logic_error("unknown curve scale");
}

// draws x grid-points matrix of the calibration on the requested scale.
Eigen::MatrixXd curve_value_matrix(const model_data& d,
                                   const mcmc_trace& trace,
                                   const Eigen::MatrixXd& grid_raw,
                                   curve_scale scale, copula_family family) {
  if (grid_raw.cols() != d.n_covariates()) {
    throw std::invalid_argument("grid dimension does not match the model");
  }
  const std::vector<chain_state> states =
      decode_states(trace.layout, trace.draws);
  const Eigen::MatrixXd zg = d.map.apply(grid_raw);
  Eigen::MatrixXd values(trace.n_draws(), grid_raw.rows());
  Eigen::VectorXd point(grid_raw.cols());
  for (Eigen::Index g = 0; g < grid_raw.rows(); ++g) {
    point = zg.row(g).transpose();
    for (std::size_t m = 0; m < states.size(); ++m) {
      const double eta = evaluate_eta(states[m].calib, point);
      values(static_cast<Eigen::Index>(m), g) =
          transform_eta(eta, scale, family);
    }
  }
  return values;
}

// Type-7 (linear interpolation between order statistics) quantile of a
// sorted vector.
double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Equidistant mesh with `side` points per dimension over per-column
// [lo, hi] boxes; rows ordered with the last column varying fastest.
Eigen::MatrixXd mesh_grid(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                          int side) {
  const int p = static_cast<int>(lo.size());
  Eigen::Index total = 1;
  for (int j = 0; j < p; ++j) total *= side;
  Eigen::MatrixXd grid(total, p);
  for (Eigen::Index r = 0; r < total; ++r) {
    Eigen::Index rest = r;
    for (int j = p - 1; j >= 0; --j) {
      const auto step = static_cast<double>(rest % side);
      rest /= side;
      grid(r, j) =
          lo[j] + (hi[j] - lo[j]) * step / static_cast<double>(side - 1);
    }
  }
  return grid;
}

model_spec study_model_spec(copula_family family, int n_covariates) {
  model_spec spec;
  spec.family = family;
  spec.covariates.resize(static_cast<std::size_t>(n_covariates));
  for (int j = 0; j < n_covariates; ++j) spec.covariates[j] = j;
  return spec;
}

void report_progress(const study_progress& progress, int replicate,
                     const std::string& stage) {
  if (progress) progress(replicate, stage);
}

}  // namespace

std::string scenario_name(scenario_id id) {
  return id == scenario_id::s1 ? "s1" : "s2";
}

int scenario_covariates(scenario_id id) {
  return id == scenario_id::s1 ? 1 : 2;
}

double true_calibration(scenario_id id, const Eigen::VectorXd& x) {
  switch (id) {
    case scenario_id::s1:
      return std::log(4.5 - 1.5 * std::sin(std::numbers::pi * x[0]));
    case scenario_id::s2:
      return std::log(4.5 - std::sin(x[0]) - std::sin(x[1]));
  }
  throw std::logic_error("unknown scenario");
}

scenario_spec make_scenario(scenario_id id, int n, std::uint64_t seed,
                            int extra_covariates) {
  scenario_spec spec;
  spec.id = id;
  spec.n = n;
  spec.seed = seed;
  spec.extra_covariates = extra_covariates;
  const int d = 1 + scenario_covariates(id);
  spec.beta1.resize(d);
  spec.beta2.resize(d);
  for (int j = 0; j < d; ++j) {
    spec.beta1[j] = 0.5 * (j + 1);
    spec.beta2[j] = 0.5 * (j + 1);
  }
  return spec;
}

dataset generate(const scenario_spec& spec) {
  const int q = scenario_covariates(spec.id);
  const int p = q + spec.extra_covariates;
  if (spec.n < 1 || spec.extra_covariates < 0) {
    throw std::invalid_argument("scenario needs n >= 1 and extra >= 0");
  }
  if (spec.beta1.size() != q + 1 || spec.beta2.size() != q + 1) {
    throw std::invalid_argument("marginal truth must have 1 + q coefficients");
  }

  rng gen(spec.seed);
  dataset d;
  d.y1.resize(spec.n);
  d.y2.resize(spec.n);
  d.x.resize(spec.n, p);
  d.covariate_names.resize(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    d.covariate_names[j] = "x" + std::to_string(j + 1);
  }

  Eigen::VectorXd xt(q);
  for (int i = 0; i < spec.n; ++i) {
    for (int j = 0; j < p; ++j) d.x(i, j) = gen.uniform();
    xt = d.x.row(i).head(q).transpose();

    const double eta = true_calibration(spec.id, xt);
    const copula_parameter theta(spec.true_family,
                                 link_inverse(spec.true_family, eta));
    const auto [u, v] = sample_pair(theta, gen);

    double mean1 = spec.beta1[0], mean2 = spec.beta2[0];
    for (int j = 0; j < q; ++j) {
      mean1 += spec.beta1[j + 1] * xt[j];
      mean2 += spec.beta2[j + 1] * xt[j];
    }
    d.y1[i] = mean1 + spec.sigma1 * norm_quantile(u);
    d.y2[i] = mean2 + spec.sigma2 * norm_quantile(v);
  }
  return d;
}

Eigen::MatrixXd scenario_grid(scenario_id id, int target_points) {
  const int p = scenario_covariates(id);
  const int side =
      p == 1 ? std::max(2, target_points)
             : std::max(2, static_cast<int>(std::lround(
                               std::sqrt(static_cast<double>(target_points)))));
  return mesh_grid(Eigen::VectorXd::Zero(p), Eigen::VectorXd::Ones(p), side);
}

curve_scale curve_scale_from_name(const std::string& name) {
  if (name == "theta") return curve_scale::theta;
  if (name == "eta") return curve_scale::eta;
  if (name == "tau") return curve_scale::tau;
  throw std::invalid_argument("unknown curve scale: " + name);
}

std::string curve_scale_name(curve_scale scale) {
  switch (scale) {
    case curve_scale::theta:
      return "theta";
    case curve_scale::eta:
      return "eta";
    case curve_scale::tau:
      return "tau";
  }
  throw std::logic_error("unknown curve scale");
}

Eigen::VectorXd true_curve(scenario_id id, const Eigen::MatrixXd& grid,
                           curve_scale scale, copula_family family) {
  Eigen::VectorXd truth(grid.rows());
  Eigen::VectorXd point(grid.cols());
  for (Eigen::Index g = 0; g < grid.rows(); ++g) {
    point = grid.row(g).transpose();
    truth[g] = transform_eta(true_calibration(id, point), scale, family);
  }
  return truth;
}

Eigen::VectorXd posterior_mean_curve(const model_data& d,
                                     const mcmc_trace& trace,
                                     const Eigen::MatrixXd& grid_raw,
                                     curve_scale scale, copula_family family) {
  const Eigen::MatrixXd values =
      curve_value_matrix(d, trace, grid_raw, scale, family);
  return values.colwise().mean().transpose();
}

curve_bands posterior_theta_bands(const model_data& d, const mcmc_trace& trace,
                                  const Eigen::MatrixXd& grid_raw,
                                  double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("credible level must lie in (0, 1)");
  }
  const Eigen::MatrixXd values = curve_value_matrix(
      d, trace, grid_raw, curve_scale::theta, trace.spec.family);

  curve_bands bands;
  bands.grid = grid_raw;
  bands.mean = values.colwise().mean().transpose();
  bands.lower.resize(grid_raw.rows());
  bands.upper.resize(grid_raw.rows());
  const double tail = 0.5 * (1.0 - level);
  std::vector<double> column(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index g = 0; g < grid_raw.rows(); ++g) {
    for (Eigen::Index m = 0; m < values.rows(); ++m) {
      column[static_cast<std::size_t>(m)] = values(m, g);
    }
    std::sort(column.begin(), column.end());
    bands.lower[g] = sorted_quantile(column, tail);
    bands.upper[g] = sorted_quantile(column, 1.0 - tail);
  }
  return bands;
}

Eigen::MatrixXd data_grid(const dataset& d, int target_points) {
  const int p = d.p();
  if (p < 1) throw std::invalid_argument("dataset has no covariates");
  const int side =
      p == 1 ? std::max(2, target_points)
             : std::max(2, static_cast<int>(std::lround(std::pow(
                               static_cast<double>(target_points),
                               1.0 / static_cast<double>(p)))));
  const Eigen::VectorXd lo = d.x.colwise().minCoeff().transpose();
  const Eigen::VectorXd hi = d.x.colwise().maxCoeff().transpose();
  return mesh_grid(lo, hi, side);
}

error_report error_metrics(const Eigen::MatrixXd& estimates,
                           const Eigen::VectorXd& truth) {
  const Eigen::Index r = estimates.rows(), g = estimates.cols();
  if (g != truth.size() || r < 1) {
    throw std::invalid_argument("estimates must be replicates x grid");
  }
  const Eigen::RowVectorXd mean = estimates.colwise().mean();

  error_report rep;
  rep.grid_size = static_cast<int>(g);
  rep.replicate_count = static_cast<int>(r);
  rep.ibias2 = (mean.transpose() - truth).squaredNorm() / static_cast<double>(g);
  // Population variance (divide by r, not r - 1) so that the decomposition
  // imse = ibias2 + ivar is an exact identity.
  rep.ivar = (estimates.rowwise() - mean).squaredNorm() /
             static_cast<double>(r * g);
  rep.imse = (estimates.rowwise() - truth.transpose()).squaredNorm() /
             static_cast<double>(r * g);
  return rep;
}

imse_study_result run_imse_study(const imse_study_options& opt) {
  if (opt.replicates < 1) throw std::invalid_argument("need replicates >= 1");
  const int q = scenario_covariates(opt.id);

  imse_study_result result;
  result.grid = scenario_grid(opt.id, opt.grid_points);
  result.truth =
      true_curve(opt.id, result.grid, opt.scale, copula_family::clayton);
  result.estimates.resize(opt.replicates, result.grid.rows());

  for (int r = 0; r < opt.replicates; ++r) {
    const std::uint64_t data_seed = derive_seed(opt.seed, 2 * r);
    const std::uint64_t chain_seed = derive_seed(opt.seed, 2 * r + 1);
    result.data_seeds.push_back(data_seed);
    result.chain_seeds.push_back(chain_seed);

    const dataset data = generate(make_scenario(opt.id, opt.n, data_seed));
    const model_spec spec = study_model_spec(copula_family::clayton, q);
    const model_data md = prepare_model_data(data, spec);

    mcmc_options mo = opt.mcmc;
    mo.seed = chain_seed;
    const mcmc_trace trace = run_chain(spec, md, mo);
    result.estimates.row(r) =
        posterior_mean_curve(md, trace, result.grid, opt.scale, spec.family)
            .transpose();
    report_progress(opt.progress, r, "replicate done");
  }
  result.report = error_metrics(result.estimates, result.truth);
  return result;
}

selection_study_result run_copula_selection_study(
    const selection_study_options& opt) {
  if (opt.replicates < 1) throw std::invalid_argument("need replicates >= 1");
  const int q = scenario_covariates(opt.id);
  constexpr copula_family families[] = {
      copula_family::clayton, copula_family::frank, copula_family::gumbel};

  selection_study_result result;
  result.totals.resize(opt.replicates, 3);

  for (int r = 0; r < opt.replicates; ++r) {
    const std::uint64_t data_seed =
        derive_seed(opt.seed, 4 * static_cast<std::uint64_t>(r));
    const dataset data = generate(make_scenario(opt.id, opt.n, data_seed));

    for (int f = 0; f < 3; ++f) {
      const model_spec spec = study_model_spec(families[f], q);
      const model_data md = prepare_model_data(data, spec);
      mcmc_options mo = opt.mcmc;
      mo.seed = derive_seed(opt.seed, 4 * static_cast<std::uint64_t>(r) + 1 +
                                          static_cast<std::uint64_t>(f));
      const mcmc_trace trace = run_chain(spec, md, mo);
      result.totals(r, f) = cvml_estimate(spec, md, trace).total;
      report_progress(opt.progress, r,
                      std::string(family_name(families[f])) + " fit done");
    }
    if (result.totals(r, 0) > result.totals(r, 1)) ++result.wins_vs_frank;
    if (result.totals(r, 0) > result.totals(r, 2)) ++result.wins_vs_gumbel;
  }
  return result;
}

varsel_study_result run_varsel_study(const varsel_study_options& opt) {
  if (opt.replicates < 1) throw std::invalid_argument("need replicates >= 1");
  const std::vector<std::vector<int>> model_covariates = {
      {0}, {0, 1}, {0, 1, 2}};

  varsel_study_result result;
  result.totals.resize(opt.replicates, 3);
  result.d21.resize(opt.replicates);
  result.d23.resize(opt.replicates);

  for (int r = 0; r < opt.replicates; ++r) {
    const std::uint64_t data_seed =
        derive_seed(opt.seed, 4 * static_cast<std::uint64_t>(r));
    const dataset data = generate(
        make_scenario(scenario_id::s2, opt.n, data_seed, /*extra=*/1));

    for (int m = 0; m < 3; ++m) {
      model_spec spec;
      spec.family = copula_family::clayton;
      spec.covariates = model_covariates[static_cast<std::size_t>(m)];
      const model_data md = prepare_model_data(data, spec);
      mcmc_options mo = opt.mcmc;
      mo.seed = derive_seed(opt.seed, 4 * static_cast<std::uint64_t>(r) + 1 +
                                          static_cast<std::uint64_t>(m));
      const mcmc_trace trace = run_chain(spec, md, mo);
      result.totals(r, m) = cvml_estimate(spec, md, trace).total;
      report_progress(opt.progress, r,
                      "model " + std::to_string(m + 1) + " fit done");
    }
    result.d21[r] = result.totals(r, 1) - result.totals(r, 0);
    result.d23[r] = result.totals(r, 1) - result.totals(r, 2);
    if (result.d21[r] > 0.0 && result.d23[r] > 0.0) ++result.m2_wins;
  }
  return result;
}

}  // namespace copcal
