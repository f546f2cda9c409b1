// Command-line driver: simulate / fit / cvml / compare / study / rerun.
//
// Every file-writing command records a JSON manifest next to its primary
// output holding the command name and the complete effective configuration;
// `rerun <manifest>` re-executes the recorded run (optionally into a fresh
// --outdir) and reproduces the outputs byte for byte. A `--config file.json`
// option on each subcommand supplies defaults for any flag not given on the
// command line (keys mirror the long flag names).
//
// Exit codes: 0 success, 2 usage or validation error, 1 runtime failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "copcal/cvml.hpp"
#include "copcal/data.hpp"
#include "copcal/mcmc.hpp"
#include "copcal/model.hpp"
#include "copcal/serialize.hpp"
#include "copcal/simulation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace copcal;

namespace {

constexpr const char* tool_version = "0.1.0";
constexpr int manifest_format = 1;

// ---------------------------------------------------------------------------
// Path plumbing

// Inputs and outputs named with relative paths resolve against `base`
// (empty for a direct invocation, the manifest's directory under rerun).
std::string resolve_path(const std::string& p, const std::string& base) {
  if (base.empty() || p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base) / p).string();
}

// --outdir override: keep the basename, move the directory.
std::string redirect_path(const std::string& out, const std::string& outdir) {
  if (outdir.empty()) return out;
  return (fs::path(outdir) / fs::path(out).filename()).string();
}

// trace.csv -> trace<suffix>, e.g. ".manifest.json" or ".bands.csv".
std::string sidecar_path(const std::string& out, const std::string& suffix) {
  const fs::path p(out);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

void ensure_parent_dir(const std::string& file) {
  const fs::path parent = fs::path(file).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::string basename_of(const std::string& p) {
  return fs::path(p).filename().string();
}

// ---------------------------------------------------------------------------
// Small helpers

class stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

json base_manifest(const std::string& command, const json& config) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["tool"] = {{"name", "copcal"},
               {"version", tool_version},
               {"manifest_format", manifest_format}};
  m["inputs"] = json::object();
  m["outputs"] = json::object();
  return m;
}

void finish_manifest(json& manifest, const std::string& path,
                     const stopwatch& timer) {
  manifest["outputs"]["manifest"] = basename_of(path);
  manifest["timing"] = {{"elapsed_seconds", timer.seconds()}};
  ensure_parent_dir(path);
  save_json(manifest, path);
  std::cout << "wrote " << path << "\n";
}

scenario_id scenario_from_string(const std::string& s) {
  if (s == "s1") return scenario_id::s1;
  if (s == "s2") return scenario_id::s2;
  throw std::invalid_argument("unknown scenario: " + s +
                              " (expected s1 or s2)");
}

copula_family family_from_string(const std::string& s) {
  const auto family = family_from_name(s);
  if (!family) throw std::invalid_argument("unknown copula family: " + s);
  return *family;
}

// "1,3" -> {0, 2}; empty selects all p columns.
std::vector<int> parse_covariates(const std::string& flag, int p) {
  std::vector<int> cols;
  if (flag.empty()) {
    for (int j = 0; j < p; ++j) cols.push_back(j);
    return cols;
  }
  std::stringstream ss(flag);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int idx = 0;
    try {
      idx = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad covariate index: \"" + item + "\"");
    }
    if (used != item.size() || idx < 1 || idx > p) {
      throw std::invalid_argument("covariate index out of range: " + item);
    }
    cols.push_back(idx - 1);
  }
  return cols;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

double median_of(Eigen::VectorXd v) {
  std::sort(v.begin(), v.end());
  const Eigen::Index n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------
// simulate

void run_simulate(const json& config, const std::string& base,
                  const std::string& outdir) {
  const stopwatch timer;
  const scenario_id id =
      scenario_from_string(config.value("scenario", std::string("s1")));
  const int n = config.value("n", 450);
  const auto seed = config.value("seed", std::uint64_t{1});
  const std::string out = redirect_path(
      resolve_path(config.value("out", std::string("data.csv")), base),
      outdir);

  const scenario_spec spec = make_scenario(id, n, seed);
  const dataset d = generate(spec);
  ensure_parent_dir(out);
  write_dataset_csv(d, out);
  std::cout << "wrote " << out << "\n";

  json manifest = base_manifest("simulate", config);
  manifest["outputs"]["data"] = basename_of(out);
  manifest["dataset"] = {{"hash", dataset_hash(d)},
                         {"n", d.n()},
                         {"covariate_names", d.covariate_names}};
  manifest["truth"] = {{"scenario", scenario_name(id)},
                       {"family", std::string(family_name(spec.true_family))},
                       {"beta1", vector_json(spec.beta1)},
                       {"beta2", vector_json(spec.beta2)},
                       {"sigma1", spec.sigma1},
                       {"sigma2", spec.sigma2}};
  finish_manifest(manifest, sidecar_path(out, ".manifest.json"), timer);
}

// ---------------------------------------------------------------------------
// fit

void write_bands_csv(const curve_bands& bands,
                     const std::vector<std::string>& names,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const std::string& name : names) out << name << ',';
  out << "mean,lower,upper\n";
  for (Eigen::Index r = 0; r < bands.grid.rows(); ++r) {
    for (Eigen::Index j = 0; j < bands.grid.cols(); ++j) {
      out << format_double(bands.grid(r, j)) << ',';
    }
    out << format_double(bands.mean[r]) << ',' << format_double(bands.lower[r])
        << ',' << format_double(bands.upper[r]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void run_fit(const json& config, const std::string& base,
             const std::string& outdir) {
  const stopwatch timer;
  const std::string data_path =
      resolve_path(config.at("data").get<std::string>(), base);
  const std::string out = redirect_path(
      resolve_path(config.value("out", std::string("trace.csv")), base),
      outdir);

  const dataset raw = read_dataset_csv(data_path);

  model_spec spec;
  spec.family =
      family_from_string(config.value("copula", std::string("clayton")));
  spec.covariates =
      parse_covariates(config.value("covariates", std::string()), raw.p());
  spec.k_max = config.value("kmax", 4);

  mcmc_options options;
  options.iterations = config.value("iters", 10000);
  options.burn_in = config.value("burnin", 3000);
  options.thin = config.value("thin", 1);
  options.seed = config.value("seed", std::uint64_t{1});
  options.mode = mode_from_name(config.value("mode", std::string("full")));

  const model_data md = prepare_model_data(raw, spec);
  const mcmc_trace trace = run_chain(spec, md, options);
  ensure_parent_dir(out);
  write_trace_csv(trace, out);
  std::cout << "wrote " << out << "\n";

  // Credible bands for theta(x) over the observed covariate box.
  std::vector<std::string> selected_names;
  dataset selected;  // covariate columns only; data_grid reads x alone
  selected.x.resize(raw.n(), spec.n_covariates());
  for (int j = 0; j < spec.n_covariates(); ++j) {
    selected.x.col(j) = raw.x.col(spec.covariates[j]);
    selected_names.push_back(raw.covariate_names[spec.covariates[j]]);
  }
  const Eigen::MatrixXd grid =
      data_grid(selected, config.value("band-points", 100));
  const curve_bands bands = posterior_theta_bands(
      md, trace, grid, config.value("band-level", 0.95));
  const std::string bands_path = sidecar_path(out, ".bands.csv");
  write_bands_csv(bands, selected_names, bands_path);
  std::cout << "wrote " << bands_path << "\n";

  // Posterior summaries: mean and SD of every trace column.
  const Eigen::RowVectorXd mean = trace.draws.colwise().mean();
  Eigen::RowVectorXd sd = Eigen::RowVectorXd::Zero(trace.draws.cols());
  if (trace.n_draws() > 1) {
    sd = ((trace.draws.rowwise() - mean).colwise().squaredNorm() /
          static_cast<double>(trace.n_draws() - 1))
             .cwiseSqrt();
  }

  json manifest = base_manifest("fit", config);
  manifest["inputs"]["data"] = {{"path", config.at("data").get<std::string>()},
                                {"hash", md.data_hash}};
  manifest["outputs"]["trace"] = basename_of(out);
  manifest["outputs"]["bands"] = basename_of(bands_path);
  manifest["dataset"] = {{"hash", md.data_hash},
                         {"n", md.n()},
                         {"covariate_names", selected_names}};
  manifest["spec"] = spec_to_json(spec);
  manifest["options"] = options_to_json(options);
  manifest["standardization"] = map_to_json(md.map);
  manifest["acceptance"] = acceptance_to_json(trace.acceptance);
  {
    const std::vector<std::string> names = trace.layout.column_names();
    json post;
    post["names"] = names;
    post["mean"] = vector_json(mean.transpose());
    post["sd"] = vector_json(sd.transpose());
    manifest["posterior"] = std::move(post);
  }
  finish_manifest(manifest, sidecar_path(out, ".manifest.json"), timer);

  std::cout << "fit: family=" << family_name(spec.family) << " n=" << md.n()
            << " draws=" << trace.n_draws() << "\nacceptance:";
  for (const block_stat& s : trace.acceptance) {
    std::cout << ' ' << s.block << '=' << std::fixed << std::setprecision(3)
              << s.rate();
  }
  std::cout << std::defaultfloat << "\n";
}

// ---------------------------------------------------------------------------
// cvml

void run_cvml(const json& config, const std::string& base,
              const std::string& outdir) {
  const stopwatch timer;
  const std::string trace_path =
      resolve_path(config.at("trace").get<std::string>(), base);
  const std::string data_path =
      resolve_path(config.at("data").get<std::string>(), base);
  const std::string out = redirect_path(
      resolve_path(
          config.value("out", sidecar_path(config.at("trace").get<std::string>(),
                                           ".cvml.json")),
          base),
      outdir);

  // The fit manifest next to the trace records the model spec and the
  // fingerprint of the dataset the chain was run on.
  const std::string fit_manifest_path =
      sidecar_path(trace_path, ".manifest.json");
  json fit_manifest;
  try {
    fit_manifest = load_json(fit_manifest_path);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("cannot read the fit manifest (") +
                             e.what() + "); cvml needs it next to the trace");
  }
  const model_spec spec = spec_from_json(fit_manifest.at("spec"));
  const std::string recorded_hash =
      fit_manifest.at("inputs").at("data").at("hash").get<std::string>();

  const dataset raw = read_dataset_csv(data_path);
  const model_data md = prepare_model_data(raw, spec);
  if (md.data_hash != recorded_hash) {
    throw std::invalid_argument(
        "dataset hash " + md.data_hash +
        " does not match the trace's recorded dataset " + recorded_hash);
  }

  mcmc_trace trace;
  trace.layout = trace_layout{md.design_dim(), md.n_covariates(), spec.k_max};
  trace.draws = read_trace_csv(trace_path, trace.layout);
  trace.spec = spec;

  const bool drop_flagged = config.value("drop-flagged", false);
  cvml_report report = cvml_estimate(spec, md, trace, drop_flagged);
  report.label = config.value("label", std::string());
  if (report.label.empty()) {
    report.label = std::string(family_name(spec.family)) + "-" +
                   std::to_string(spec.n_covariates()) + "cov";
  }

  json manifest = base_manifest("cvml", config);
  manifest["inputs"]["trace"] = {
      {"path", config.at("trace").get<std::string>()}};
  manifest["inputs"]["data"] = {{"path", config.at("data").get<std::string>()},
                                {"hash", md.data_hash}};
  manifest["outputs"]["report"] = basename_of(out);
  manifest["report"] = report_to_json(report);
  ensure_parent_dir(out);
  manifest["timing"] = {{"elapsed_seconds", timer.seconds()}};
  save_json(manifest, out);
  std::cout << "wrote " << out << "\n";

  std::cout << "cvml: total=" << format_double(report.total)
            << " draws=" << report.draw_count
            << " flagged=" << report.flagged.size() << "\n";
  if (!report.flagged.empty() && !drop_flagged) {
    std::cout << "note: " << report.flagged.size()
              << " observation(s) hit a zero-likelihood draw; rerun with "
                 "--drop-flagged to exclude those draws\n";
  }
}

// ---------------------------------------------------------------------------
// compare

void run_compare(const std::vector<std::string>& files) {
  std::vector<cvml_report> reports;
  for (const std::string& file : files) {
    json j = load_json(file);
    if (j.contains("report")) j = j.at("report");
    reports.push_back(report_from_json(j));
    if (reports.back().label.empty()) reports.back().label = file;
  }
  const std::vector<int> order = rank_reports(reports);

  std::cout << std::left << std::setw(5) << "rank" << std::setw(14) << "total"
            << std::setw(9) << "family" << std::setw(5) << "cov"
            << std::setw(9) << "flagged"
            << "label\n";
  for (std::size_t i = 0; i < order.size(); ++i) {
    const cvml_report& r = reports[static_cast<std::size_t>(order[i])];
    std::ostringstream total;
    total << std::fixed << std::setprecision(3) << r.total;
    std::cout << std::left << std::setw(5) << i + 1 << std::setw(14)
              << total.str() << std::setw(9) << r.family << std::setw(5)
              << r.n_covariates << std::setw(9) << r.flagged.size() << r.label
              << "\n";
  }
}

// ---------------------------------------------------------------------------
// study

void run_study(const json& config, const std::string& base,
               const std::string& outdir_override) {
  const stopwatch timer;
  const std::string kind = config.at("kind").get<std::string>();
  const std::string dir =
      outdir_override.empty()
          ? resolve_path(config.value("outdir", std::string(".")), base)
          : outdir_override;
  fs::create_directories(dir.empty() ? "." : dir);

  mcmc_options mc;
  mc.iterations = config.value("iters", 10000);
  mc.burn_in = config.value("burnin", 3000);
  const auto seed = config.value("seed", std::uint64_t{1});
  const int n = config.value("n", 450);
  int replicates = config.value("replicates", 0);

  const auto progress = [&](int r, const std::string& stage) {
    std::cerr << "[" << kind << "] replicate " << r + 1 << "/" << replicates
              << ": " << stage << "\n";
  };

  json manifest = base_manifest("study", config);

  if (kind == "imse") {
    if (replicates <= 0) replicates = 10;
    imse_study_options opt;
    opt.id = scenario_from_string(config.value("scenario", std::string("s1")));
    opt.replicates = replicates;
    opt.n = n;
    opt.mcmc = mc;
    opt.seed = seed;
    opt.scale =
        curve_scale_from_name(config.value("scale", std::string("theta")));
    opt.grid_points = config.value("grid-points", 400);
    opt.progress = progress;
    const imse_study_result res = run_imse_study(opt);

    const std::string csv_path =
        (fs::path(dir) / ("imse_" + scenario_name(opt.id) + ".csv")).string();
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open for writing: " + csv_path);
    csv << "replicate,point";
    for (Eigen::Index j = 0; j < res.grid.cols(); ++j) csv << ",x" << j + 1;
    csv << ",truth,estimate\n";
    for (int r = 0; r < opt.replicates; ++r) {
      for (Eigen::Index g = 0; g < res.grid.rows(); ++g) {
        csv << r + 1 << ',' << g + 1;
        for (Eigen::Index j = 0; j < res.grid.cols(); ++j) {
          csv << ',' << format_double(res.grid(g, j));
        }
        csv << ',' << format_double(res.truth[g]) << ','
            << format_double(res.estimates(r, g)) << '\n';
      }
    }
    if (!csv) throw std::runtime_error("write failed: " + csv_path);
    std::cout << "wrote " << csv_path << "\n";

    manifest["outputs"]["estimates"] = basename_of(csv_path);
    manifest["report"] = {{"ibias2", res.report.ibias2},
                          {"ivar", res.report.ivar},
                          {"imse", res.report.imse},
                          {"grid_size", res.report.grid_size},
                          {"replicate_count", res.report.replicate_count},
                          {"scale", curve_scale_name(opt.scale)}};
    manifest["seeds"] = {{"data", res.data_seeds}, {"chain", res.chain_seeds}};
    std::cout << "imse=" << format_double(res.report.imse)
              << " ibias2=" << format_double(res.report.ibias2)
              << " ivar=" << format_double(res.report.ivar) << "\n";
    finish_manifest(
        manifest,
        (fs::path(dir) / ("imse_" + scenario_name(opt.id) + ".manifest.json"))
            .string(),
        timer);
    return;
  }

  if (kind == "copula-select") {
    if (replicates <= 0) replicates = 20;
    selection_study_options opt;
    opt.id = scenario_from_string(config.value("scenario", std::string("s1")));
    opt.replicates = replicates;
    opt.n = n;
    opt.mcmc = mc;
    opt.seed = seed;
    opt.progress = progress;
    const selection_study_result res = run_copula_selection_study(opt);

    const std::string csv_path = (fs::path(dir) / "copula_select.csv").string();
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open for writing: " + csv_path);
    csv << "replicate,cvml_clayton,cvml_frank,cvml_gumbel,win_vs_frank,"
           "win_vs_gumbel\n";
    for (int r = 0; r < replicates; ++r) {
      csv << r + 1 << ',' << format_double(res.totals(r, 0)) << ','
          << format_double(res.totals(r, 1)) << ','
          << format_double(res.totals(r, 2)) << ','
          << (res.totals(r, 0) > res.totals(r, 1) ? 1 : 0) << ','
          << (res.totals(r, 0) > res.totals(r, 2) ? 1 : 0) << '\n';
    }
    if (!csv) throw std::runtime_error("write failed: " + csv_path);
    std::cout << "wrote " << csv_path << "\n";

    manifest["outputs"]["table"] = basename_of(csv_path);
    manifest["wins"] = {{"clayton_vs_frank", res.wins_vs_frank},
                        {"clayton_vs_gumbel", res.wins_vs_gumbel},
                        {"replicates", replicates}};
    std::cout << "clayton wins: vs frank " << res.wins_vs_frank << "/"
              << replicates << ", vs gumbel " << res.wins_vs_gumbel << "/"
              << replicates << "\n";
    finish_manifest(manifest,
                    (fs::path(dir) / "copula_select.manifest.json").string(),
                    timer);
    return;
  }

  if (kind == "var-select") {
    if (replicates <= 0) replicates = 20;
    varsel_study_options opt;
    opt.replicates = replicates;
    opt.n = n;
    opt.mcmc = mc;
    opt.seed = seed;
    opt.progress = progress;
    const varsel_study_result res = run_varsel_study(opt);

    const std::string csv_path = (fs::path(dir) / "var_select.csv").string();
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open for writing: " + csv_path);
    csv << "replicate,cvml_m1,cvml_m2,cvml_m3,d21,d23\n";
    for (int r = 0; r < replicates; ++r) {
      csv << r + 1 << ',' << format_double(res.totals(r, 0)) << ','
          << format_double(res.totals(r, 1)) << ','
          << format_double(res.totals(r, 2)) << ','
          << format_double(res.d21[r]) << ',' << format_double(res.d23[r])
          << '\n';
    }
    if (!csv) throw std::runtime_error("write failed: " + csv_path);
    std::cout << "wrote " << csv_path << "\n";

    manifest["outputs"]["table"] = basename_of(csv_path);
    manifest["summary"] = {{"m2_wins", res.m2_wins},
                           {"replicates", replicates},
                           {"median_d21", median_of(res.d21)},
                           {"median_d23", median_of(res.d23)}};
    std::cout << "m2 wins " << res.m2_wins << "/" << replicates
              << " median_d21=" << format_double(median_of(res.d21))
              << " median_d23=" << format_double(median_of(res.d23)) << "\n";
    finish_manifest(manifest,
                    (fs::path(dir) / "var_select.manifest.json").string(),
                    timer);
    return;
  }

  throw std::invalid_argument("unknown study kind: " + kind);
}

// ---------------------------------------------------------------------------
// rerun

void dispatch_command(const std::string& command, const json& config,
                      const std::string& base, const std::string& outdir) {
  if (command == "simulate") {
    run_simulate(config, base, outdir);
  } else if (command == "fit") {
    run_fit(config, base, outdir);
  } else if (command == "cvml") {
    run_cvml(config, base, outdir);
  } else if (command == "study") {
    run_study(config, base, outdir);
  } else {
    throw std::invalid_argument("manifest names unknown command: " + command);
  }
}

void run_rerun(const std::string& manifest_path, const std::string& outdir) {
  const json manifest = load_json(manifest_path);
  if (!manifest.contains("command") || !manifest.contains("config")) {
    throw std::invalid_argument(manifest_path +
                                " is not a run manifest (missing command or "
                                "config)");
  }
  const std::string base = fs::path(manifest_path).parent_path().string();
  dispatch_command(manifest.at("command").get<std::string>(),
                   manifest.at("config"), base, outdir);
}

// ---------------------------------------------------------------------------
// --config pre-pass: inject file-supplied values for flags absent on the
// command line. Booleans become --flag=true/false; everything else becomes
// "--flag value".

bool flag_present(const std::vector<std::string>& args,
                  const std::string& flag) {
  for (const std::string& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

std::vector<std::string> inject_config(std::vector<std::string> args) {
  std::string config_file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_file = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_file = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (config_file.empty()) return args;

  const json cfg = load_json(config_file);
  if (!cfg.is_object()) {
    throw std::invalid_argument("config file must hold a JSON object: " +
                                config_file);
  }
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (flag_present(args, flag)) continue;  // explicit flags win
    if (value.is_boolean()) {
      args.push_back(flag + (value.get<bool>() ? "=true" : "=false"));
    } else if (value.is_string()) {
      args.push_back(flag);
      args.push_back(value.get<std::string>());
    } else {
      args.push_back(flag);
      args.push_back(value.dump());
    }
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional copula calibration: simulate, fit, select"};
  app.require_subcommand(1);

  // simulate ----------------------------------------------------------------
  struct {
    std::string scenario = "s1";
    int n = 450;
    std::uint64_t seed = 1;
    std::string out = "data.csv";
  } sim;
  auto* sim_cmd =
      app.add_subcommand("simulate", "Generate a scenario dataset CSV");
  sim_cmd->add_option("--scenario", sim.scenario, "Scenario (s1 or s2)")
      ->required()
      ->check(CLI::IsMember({"s1", "s2"}));
  sim_cmd->add_option("--n", sim.n, "Sample size")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "RNG seed");
  sim_cmd->add_option("--out", sim.out, "Output CSV path");

  // fit ---------------------------------------------------------------------
  struct {
    std::string data;
    std::string copula = "clayton";
    std::string covariates;
    int kmax = 4;
    int iters = 10000;
    int burnin = 3000;
    int thin = 1;
    std::uint64_t seed = 1;
    std::string out = "trace.csv";
    std::string mode = "full";
    int band_points = 100;
    double band_level = 0.95;
  } fit;
  auto* fit_cmd = app.add_subcommand("fit", "Run one MCMC chain on a dataset");
  fit_cmd->add_option("--data", fit.data, "Input dataset CSV")->required();
  fit_cmd->add_option("--copula", fit.copula, "Copula family")
      ->check(CLI::IsMember({"clayton", "frank", "gumbel"}));
  fit_cmd->add_option("--covariates", fit.covariates,
                      "Comma-separated 1-based covariate columns (default all)");
  fit_cmd->add_option("--kmax", fit.kmax, "Knots per covariate")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--iters", fit.iters, "Total MCMC iterations")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--burnin", fit.burnin, "Burn-in iterations")
      ->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--thin", fit.thin, "Keep every thin-th draw")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fit.seed, "RNG seed");
  fit_cmd->add_option("--out", fit.out, "Output trace CSV path");
  fit_cmd->add_option("--mode", fit.mode, "Likelihood mode (testing hook)")
      ->check(CLI::IsMember({"full", "marginal_only", "prior_only"}));
  fit_cmd->add_option("--band-points", fit.band_points,
                      "Grid size for credible bands")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--band-level", fit.band_level,
                      "Credible band coverage level");

  // cvml ----------------------------------------------------------------
  struct {
    std::string trace;
    std::string data;
    std::string out;
    std::string label;
    bool drop_flagged = false;
  } cv;
  auto* cvml_cmd = app.add_subcommand(
      "cvml", "Cross-validated marginal likelihood for a fitted trace");
  cvml_cmd->add_option("--trace", cv.trace, "Trace CSV from fit")->required();
  cvml_cmd->add_option("--data", cv.data, "Dataset CSV the chain was fit on")
      ->required();
  cvml_cmd->add_option("--out", cv.out,
                       "Report JSON path (default <trace>.cvml.json)");
  cvml_cmd->add_option("--label", cv.label, "Label shown in comparisons");
  cvml_cmd->add_flag("--drop-flagged", cv.drop_flagged,
                     "Exclude zero-likelihood draws from flagged observations");

  // compare -------------------------------------------------------------
  std::vector<std::string> compare_files;
  auto* compare_cmd =
      app.add_subcommand("compare", "Rank CVML report JSON files");
  compare_cmd
      ->add_option("reports", compare_files, "CVML report JSON files")
      ->required()
      ->expected(-1);

  // study -----------------------------------------------------------------
  struct {
    std::string kind;
    std::string scenario = "s1";
    int replicates = 0;
    int n = 450;
    int iters = 10000;
    int burnin = 3000;
    std::uint64_t seed = 1;
    std::string outdir = ".";
    std::string scale = "theta";
    int grid_points = 400;
  } study;
  auto* study_cmd =
      app.add_subcommand("study", "Run a replicated simulation study");
  study_cmd->add_option("--kind", study.kind, "Study kind")
      ->required()
      ->check(CLI::IsMember({"imse", "copula-select", "var-select"}));
  study_cmd->add_option("--scenario", study.scenario,
                        "Scenario for imse/copula-select (s1 or s2)")
      ->check(CLI::IsMember({"s1", "s2"}));
  study_cmd->add_option("--replicates", study.replicates,
                        "Replicates (default 10 for imse, else 20)");
  study_cmd->add_option("--n", study.n, "Sample size per replicate")
      ->check(CLI::PositiveNumber);
  study_cmd->add_option("--iters", study.iters, "MCMC iterations per fit")
      ->check(CLI::PositiveNumber);
  study_cmd->add_option("--burnin", study.burnin, "Burn-in per fit")
      ->check(CLI::NonNegativeNumber);
  study_cmd->add_option("--seed", study.seed, "Root seed (replicate seeds are "
                                              "derived from it)");
  study_cmd->add_option("--outdir", study.outdir, "Output directory");
  study_cmd->add_option("--scale", study.scale,
                        "Error scale for imse (theta, eta, or tau)")
      ->check(CLI::IsMember({"theta", "eta", "tau"}));
  study_cmd->add_option("--grid-points", study.grid_points,
                        "Evaluation grid size")
      ->check(CLI::PositiveNumber);

  // rerun -----------------------------------------------------------------
  struct {
    std::string manifest;
    std::string outdir;
  } rerun;
  auto* rerun_cmd = app.add_subcommand(
      "rerun", "Re-execute a recorded run from its manifest");
  rerun_cmd->add_option("manifest", rerun.manifest, "Run manifest JSON")
      ->required();
  rerun_cmd->add_option("--outdir", rerun.outdir,
                        "Write outputs into this directory instead of the "
                        "recorded locations");

  try {
    std::vector<std::string> args =
        inject_config(std::vector<std::string>(argv + 1, argv + argc));
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));

    if (sim_cmd->parsed()) {
      run_simulate(json{{"scenario", sim.scenario},
                        {"n", sim.n},
                        {"seed", sim.seed},
                        {"out", sim.out}},
                   "", "");
    } else if (fit_cmd->parsed()) {
      run_fit(json{{"data", fit.data},
                   {"copula", fit.copula},
                   {"covariates", fit.covariates},
                   {"kmax", fit.kmax},
                   {"iters", fit.iters},
                   {"burnin", fit.burnin},
                   {"thin", fit.thin},
                   {"seed", fit.seed},
                   {"out", fit.out},
                   {"mode", fit.mode},
                   {"band-points", fit.band_points},
                   {"band-level", fit.band_level}},
              "", "");
    } else if (cvml_cmd->parsed()) {
      json cfg{{"trace", cv.trace},
               {"data", cv.data},
               {"label", cv.label},
               {"drop-flagged", cv.drop_flagged}};
      cfg["out"] = cv.out.empty() ? sidecar_path(cv.trace, ".cvml.json")
                                  : cv.out;
      run_cvml(cfg, "", "");
    } else if (compare_cmd->parsed()) {
      run_compare(compare_files);
    } else if (study_cmd->parsed()) {
      run_study(json{{"kind", study.kind},
                     {"scenario", study.scenario},
                     {"replicates", study.replicates},
                     {"n", study.n},
                     {"iters", study.iters},
                     {"burnin", study.burnin},
                     {"seed", study.seed},
                     {"outdir", study.outdir},
                     {"scale", study.scale},
                     {"grid-points", study.grid_points}},
                "", "");
    } else if (rerun_cmd->parsed()) {
      run_rerun(rerun.manifest, rerun.outdir);
    }
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
