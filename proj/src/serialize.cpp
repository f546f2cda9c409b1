#include "copcal/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace copcal {

namespace {

using nlohmann::json;

json finite_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

double number_or_neg_inf(const json& j) {
  if (j.is_null()) return -std::numeric_limits<double>::infinity();
  return j.get<double>();
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(finite_or_null(v[i]));
  return a;
}

Eigen::VectorXd vector_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = number_or_neg_inf(a[i]);
  }
  return v;
}

}  // namespace

nlohmann::json calibration_to_json(const calibration_state& s) {
  json components = json::array();
  for (const spline_component& c : s.components) {
    json jc;
    jc["alpha"] = {c.alpha[0], c.alpha[1], c.alpha[2]};
    jc["psi"] = vector_to_json(c.psi);
    jc["gamma"] = vector_to_json(c.gamma);
    jc["zeta"] = c.zeta;
    jc["lambda"] = c.lambda;
    components.push_back(std::move(jc));
  }
  return json{{"alpha0", s.alpha0}, {"components", std::move(components)}};
}

calibration_state calibration_from_json(const nlohmann::json& j) {
  calibration_state s;
  s.alpha0 = j.at("alpha0").get<double>();
  for (const json& jc : j.at("components")) {
    spline_component c;
    const auto alpha = jc.at("alpha").get<std::vector<double>>();
    if (alpha.size() != 3) {
      throw std::invalid_argument("component alpha must have 3 entries");
    }
    c.alpha = Eigen::Vector3d(alpha[0], alpha[1], alpha[2]);
    c.psi = vector_from_json(jc.at("psi"));
    c.gamma = vector_from_json(jc.at("gamma"));
    c.zeta = jc.at("zeta").get<std::vector<int>>();
    c.lambda = jc.at("lambda").get<int>();
    if (c.psi.size() != c.gamma.size() ||
        static_cast<std::size_t>(c.psi.size()) != c.zeta.size()) {
      throw std::invalid_argument("component psi/gamma/zeta sizes differ");
    }
    s.components.push_back(std::move(c));
  }
  return s;
}

nlohmann::json map_to_json(const standardization_map& m) {
  return json{{"center", vector_to_json(m.center)},
              {"half_range", vector_to_json(m.half_range)}};
}

standardization_map map_from_json(const nlohmann::json& j) {
  standardization_map m;
  m.center = vector_from_json(j.at("center"));
  m.half_range = vector_from_json(j.at("half_range"));
  if (m.center.size() != m.half_range.size()) {
    throw std::invalid_argument("standardization center/half_range mismatch");
  }
  return m;
}

nlohmann::json spec_to_json(const model_spec& spec) {
  return json{{"family", std::string(family_name(spec.family))},
              {"covariates", spec.covariates},
              {"k_max", spec.k_max},
              {"coef_prior_var", spec.coef_prior_var},
              {"sigma_prior_shape", spec.sigma_prior_shape},
              {"sigma_prior_rate", spec.sigma_prior_rate},
              {"lambda_binomial_p", spec.lambda_binomial_p}};
}

model_spec spec_from_json(const nlohmann::json& j) {
  model_spec spec;
  const auto name = j.at("family").get<std::string>();
  const auto family = family_from_name(name);
  if (!family) throw std::invalid_argument("unknown copula family: " + name);
  spec.family = *family;
  spec.covariates = j.at("covariates").get<std::vector<int>>();
  spec.k_max = j.at("k_max").get<int>();
  spec.coef_prior_var = j.value("coef_prior_var", spec.coef_prior_var);
  spec.sigma_prior_shape = j.value("sigma_prior_shape", spec.sigma_prior_shape);
  spec.sigma_prior_rate = j.value("sigma_prior_rate", spec.sigma_prior_rate);
  spec.lambda_binomial_p = j.value("lambda_binomial_p", spec.lambda_binomial_p);
  return spec;
}

std::string mode_name(likelihood_mode mode) {
  switch (mode) {
    case likelihood_mode::full:
      return "full";
    case likelihood_mode::marginal_only:
      return "marginal_only";
    case likelihood_mode::prior_only:
      return "prior_only";
  }
  throw std::logic_error("unknown likelihood mode");
}

likelihood_mode mode_from_name(const std::string& name) {
  if (name == "full") return likelihood_mode::full;
  if (name == "marginal_only") return likelihood_mode::marginal_only;
  if (name == "prior_only") return likelihood_mode::prior_only;
  throw std::invalid_argument("unknown likelihood mode: " + name);
}

nlohmann::json options_to_json(const mcmc_options& o) {
  return json{{"iterations", o.iterations},
              {"burn_in", o.burn_in},
              {"thin", o.thin},
              {"seed", o.seed},
              {"mode", mode_name(o.mode)},
              {"beta_im_prob", o.beta_im_prob},
              {"beta_scale", o.beta_scale},
              {"alpha_scale", o.alpha_scale},
              {"psi_scale", o.psi_scale},
              {"adapt", o.adapt},
              {"adapt_window", o.adapt_window},
              {"fixed_lambda", o.fixed_lambda},
              {"fix_zeta", o.fix_zeta}};
}

mcmc_options options_from_json(const nlohmann::json& j) {
  mcmc_options o;
  o.iterations = j.at("iterations").get<int>();
  o.burn_in = j.at("burn_in").get<int>();
  o.thin = j.value("thin", o.thin);
  o.seed = j.at("seed").get<std::uint64_t>();
  o.mode = mode_from_name(j.value("mode", std::string("full")));
  o.beta_im_prob = j.value("beta_im_prob", o.beta_im_prob);
  o.beta_scale = j.value("beta_scale", o.beta_scale);
  o.alpha_scale = j.value("alpha_scale", o.alpha_scale);
  o.psi_scale = j.value("psi_scale", o.psi_scale);
  o.adapt = j.value("adapt", o.adapt);
  o.adapt_window = j.value("adapt_window", o.adapt_window);
  o.fixed_lambda = j.value("fixed_lambda", o.fixed_lambda);
  o.fix_zeta = j.value("fix_zeta", o.fix_zeta);
  return o;
}

nlohmann::json acceptance_to_json(const std::vector<block_stat>& stats) {
  json a = json::array();
  for (const block_stat& s : stats) {
    json js{{"block", s.block},
            {"accepted", s.accepted},
            {"attempted", s.attempted},
            {"rate", s.rate()}};
    if (std::isfinite(s.scale)) js["scale"] = s.scale;
    a.push_back(std::move(js));
  }
  return a;
}

nlohmann::json report_to_json(const cvml_report& r) {
  return json{{"total", finite_or_null(r.total)},
              {"per_observation", vector_to_json(r.per_observation)},
              {"draw_count", r.draw_count},
              {"flagged", r.flagged},
              {"data_hash", r.data_hash},
              {"family", r.family},
              {"n_covariates", r.n_covariates},
              {"label", r.label}};
}

cvml_report report_from_json(const nlohmann::json& j) {
  cvml_report r;
  r.total = number_or_neg_inf(j.at("total"));
  r.per_observation = vector_from_json(j.at("per_observation"));
  r.draw_count = j.at("draw_count").get<int>();
  r.flagged = j.value("flagged", std::vector<int>{});
  r.data_hash = j.at("data_hash").get<std::string>();
  r.family = j.at("family").get<std::string>();
  r.n_covariates = j.at("n_covariates").get<int>();
  r.label = j.value("label", std::string());
  return r;
}

void save_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return json::parse(in);
}

}  // namespace copcal
