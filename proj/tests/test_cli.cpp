#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include <json.hpp>

#include "copcal/data.hpp"
#include "copcal/mcmc.hpp"
#include "copcal/serialize.hpp"
#include "test_util.hpp"

using namespace copcal;
using nlohmann::json;

namespace {

struct cli_result {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

// Runs the installed binary with the given argument string; output is
// captured through a scratch file.
cli_result run_cli(test_util::scratch_dir& dir, const std::string& args) {
  static int counter = 0;
  const std::string capture =
      dir.path("capture_" + std::to_string(counter++) + ".txt");
  const std::string cmd = std::string("\"") + COPCAL_CLI_PATH + "\" " + args +
                          " > \"" + capture + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  cli_result r;
  r.output = test_util::read_file(capture);
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
  return r;
}

json manifest_at(const std::string& path) {
  return load_json(path);
}

}  // namespace

TEST_CASE("help, usage errors, and validation exit codes") {
  test_util::scratch_dir dir("cli_usage");

  const cli_result help = run_cli(dir, "--help");
  CHECK(help.code == 0);
  CHECK(help.output.find("simulate") != std::string::npos);
  CHECK(help.output.find("fit") != std::string::npos);
  CHECK(help.output.find("cvml") != std::string::npos);

  CHECK(run_cli(dir, "").code == 2);  // a subcommand is required
  CHECK(run_cli(dir, "simulate --scenario s1 --bogus 3").code == 2);
  CHECK(run_cli(dir, "simulate --scenario s3").code == 2);
  CHECK(run_cli(dir, "simulate").code == 2);  // --scenario is required
  CHECK(run_cli(dir, "study --kind imse --n -5").code == 2);

  const cli_result missing =
      run_cli(dir, "fit --data " + dir.path("absent.csv"));
  CHECK(missing.code == 1);  // runtime failure, not a usage error
  CHECK(missing.output.find("error:") != std::string::npos);
}

TEST_CASE("simulate: outputs, manifest contents, determinism") {
  test_util::scratch_dir dir("cli_simulate");
  const std::string out = dir.path("runs/data.csv");

  const cli_result r =
      run_cli(dir, "simulate --scenario s1 --n 40 --seed 7 --out " + out);
  REQUIRE(r.code == 0);
  CHECK(r.output.find("wrote") != std::string::npos);

  const dataset d = read_dataset_csv(out);
  CHECK(d.n() == 40);
  CHECK(d.p() == 1);

  const json m = manifest_at(dir.path("runs/data.manifest.json"));
  CHECK(m.at("command") == "simulate");
  CHECK(m.at("config").at("n") == 40);
  CHECK(m.at("dataset").at("hash") == dataset_hash(d));
  CHECK(m.at("truth").at("scenario") == "s1");
  CHECK(m.at("truth").at("family") == "clayton");
  CHECK(m.at("outputs").at("data") == "data.csv");
  CHECK(m.contains("timing"));

  // Same flags elsewhere: byte-identical dataset.
  const std::string out2 = dir.path("again/data.csv");
  REQUIRE(run_cli(dir, "simulate --scenario s1 --n 40 --seed 7 --out " + out2)
              .code == 0);
  CHECK(test_util::read_file(out) == test_util::read_file(out2));

  // A different seed changes the bytes.
  const std::string out3 = dir.path("other/data.csv");
  REQUIRE(run_cli(dir, "simulate --scenario s1 --n 40 --seed 8 --out " + out3)
              .code == 0);
  CHECK(test_util::read_file(out) != test_util::read_file(out3));
}

TEST_CASE("fit then cvml: sidecars, trace shape, hash guard") {
  test_util::scratch_dir dir("cli_fit");
  const std::string data = dir.path("data.csv");
  REQUIRE(run_cli(dir, "simulate --scenario s1 --n 40 --seed 5 --out " + data)
              .code == 0);

  const std::string trace = dir.path("trace.csv");
  const cli_result fit = run_cli(
      dir, "fit --data " + data +
               " --copula clayton --iters 400 --burnin 100 --seed 3 --out " +
               trace);
  REQUIRE(fit.code == 0);
  CHECK(fit.output.find("fit: family=clayton n=40 draws=300") !=
        std::string::npos);
  CHECK(fit.output.find("acceptance:") != std::string::npos);
  CHECK(fit.output.find("beta1_im=") != std::string::npos);

  // Trace: 300 kept draws over the full column layout.
  trace_layout layout;
  layout.design_dim = 2;
  layout.n_cov = 1;
  layout.k_max = 4;
  const Eigen::MatrixXd draws = read_trace_csv(trace, layout);
  CHECK(draws.rows() == 300);
  CHECK(draws.cols() == layout.n_columns());

  // Bands sidecar: covariate column plus the three band columns.
  const std::string bands = test_util::read_file(dir.path("trace.bands.csv"));
  CHECK(bands.rfind("x1,mean,lower,upper\n", 0) == 0);

  const json m = manifest_at(dir.path("trace.manifest.json"));
  CHECK(m.at("command") == "fit");
  CHECK(m.at("spec").at("family") == "clayton");
  CHECK(m.at("options").at("iterations") == 400);
  CHECK(m.at("options").at("seed") == 3);
  CHECK(m.at("inputs").at("data").at("hash") ==
        dataset_hash(read_dataset_csv(data)));
  CHECK(m.at("standardization").at("center").size() == 1);
  CHECK(m.at("acceptance").size() > 0);
  CHECK(m.at("posterior").at("names").size() ==
        static_cast<std::size_t>(layout.n_columns()));

  // cvml with the matching dataset succeeds and writes its report.
  const cli_result cv =
      run_cli(dir, "cvml --trace " + trace + " --data " + data);
  REQUIRE(cv.code == 0);
  const json cm = manifest_at(dir.path("trace.cvml.json"));
  CHECK(cm.at("command") == "cvml");
  const cvml_report report = report_from_json(cm.at("report"));
  CHECK(std::isfinite(report.total));
  CHECK(report.total < 0.0);
  CHECK(report.draw_count == 300);
  CHECK(report.family == "clayton");
  CHECK(report.label == "clayton-1cov");

  // cvml against a different dataset is rejected by the hash guard.
  const std::string other = dir.path("other.csv");
  REQUIRE(run_cli(dir, "simulate --scenario s1 --n 40 --seed 6 --out " + other)
              .code == 0);
  const cli_result mismatch =
      run_cli(dir, "cvml --trace " + trace + " --data " + other);
  CHECK(mismatch.code == 2);
  CHECK(mismatch.output.find("hash") != std::string::npos);

  // A trace with no fit manifest next to it cannot be scored.
  const std::string lonely = dir.path("lonely.csv");
  test_util::write_file(lonely, test_util::read_file(trace));
  const cli_result orphan =
      run_cli(dir, "cvml --trace " + lonely + " --data " + data);
  CHECK(orphan.code == 1);
  CHECK(orphan.output.find("manifest") != std::string::npos);
}

TEST_CASE("compare ranks report files deterministically") {
  test_util::scratch_dir dir("cli_compare");

  auto write_report = [&](const std::string& name, double total,
                          const std::string& family, int covs) {
    cvml_report r;
    r.total = total;
    r.per_observation = Eigen::VectorXd::Constant(2, total / 2.0);
    r.draw_count = 10;
    r.data_hash = "feedc0de";
    r.family = family;
    r.n_covariates = covs;
    r.label = name;
    save_json(report_to_json(r), dir.path(name + ".json"));
  };
  write_report("mc", -10213.4, "clayton", 1);
  write_report("mf", -7683.7, "frank", 1);
  write_report("mg", -54763.2, "gumbel", 1);

  const cli_result r = run_cli(dir, "compare " + dir.path("mf.json") + " " +
                                        dir.path("mc.json") + " " +
                                        dir.path("mg.json"));
  REQUIRE(r.code == 0);
  const auto pos_frank = r.output.find("frank");
  const auto pos_clayton = r.output.find("clayton");
  const auto pos_gumbel = r.output.find("gumbel");
  REQUIRE(pos_frank != std::string::npos);
  REQUIRE(pos_clayton != std::string::npos);
  REQUIRE(pos_gumbel != std::string::npos);
  CHECK(pos_frank < pos_clayton);
  CHECK(pos_clayton < pos_gumbel);

  // Reports scored against different datasets cannot be compared.
  auto write_mismatched = [&](const std::string& name) {
    cvml_report r2;
    r2.total = -1.0;
    r2.per_observation = Eigen::VectorXd::Constant(1, -1.0);
    r2.draw_count = 1;
    r2.data_hash = "0ddba11";
    r2.family = "clayton";
    r2.n_covariates = 1;
    save_json(report_to_json(r2), dir.path(name + ".json"));
  };
  write_mismatched("stranger");
  CHECK(run_cli(dir, "compare " + dir.path("mf.json") + " " +
                         dir.path("stranger.json"))
            .code == 2);
}

TEST_CASE("config file supplies defaults; explicit flags win") {
  test_util::scratch_dir dir("cli_config");
  const std::string cfg = dir.path("config.json");
  json config{{"scenario", "s2"},
              {"n", 30},
              {"seed", 9},
              {"out", dir.path("cfg/data.csv")}};
  save_json(config, cfg);

  // --scenario comes from the file (satisfying the required flag); the
  // explicit --n overrides the file's 30.
  const cli_result r =
      run_cli(dir, "simulate --config " + cfg + " --n 25");
  REQUIRE(r.code == 0);
  const dataset d = read_dataset_csv(dir.path("cfg/data.csv"));
  CHECK(d.n() == 25);
  CHECK(d.p() == 2);  // s2 has two covariates

  const json m = manifest_at(dir.path("cfg/data.manifest.json"));
  CHECK(m.at("config").at("n") == 25);
  CHECK(m.at("config").at("scenario") == "s2");

  CHECK(run_cli(dir, "simulate --config " + dir.path("absent.json")).code ==
        1);
}

TEST_CASE("small imse study writes the table and a consistent manifest") {
  test_util::scratch_dir dir("cli_study");
  const std::string outdir = dir.path("study");
  const cli_result r = run_cli(
      dir,
      "study --kind imse --scenario s1 --replicates 2 --n 30 --iters 300 "
      "--burnin 100 --grid-points 40 --seed 11 --outdir " +
          outdir);
  REQUIRE(r.code == 0);
  CHECK(r.output.find("imse=") != std::string::npos);

  const std::string table = test_util::read_file(outdir + "/imse_s1.csv");
  CHECK(table.rfind("replicate,point,x1,truth,estimate\n", 0) == 0);
  const auto rows = std::count(table.begin(), table.end(), '\n');
  CHECK(rows == 1 + 2 * 40);

  const json m = manifest_at(outdir + "/imse_s1.manifest.json");
  CHECK(m.at("command") == "study");
  const double imse = m.at("report").at("imse").get<double>();
  const double parts = m.at("report").at("ibias2").get<double>() +
                       m.at("report").at("ivar").get<double>();
  CHECK(imse == doctest::Approx(parts).epsilon(1e-10));
  CHECK(m.at("seeds").at("data").size() == 2);
}

TEST_CASE("rerun reproduces a recorded simulate byte for byte") {
  test_util::scratch_dir dir("cli_rerun");
  const std::string out = dir.path("orig/data.csv");
  REQUIRE(run_cli(dir, "simulate --scenario s2 --n 35 --seed 13 --out " + out)
              .code == 0);

  const std::string redo = dir.path("redo");
  const cli_result r = run_cli(
      dir, "rerun " + dir.path("orig/data.manifest.json") + " --outdir " + redo);
  REQUIRE(r.code == 0);
  CHECK(test_util::read_file(out) ==
        test_util::read_file(redo + "/data.csv"));

  json a = manifest_at(dir.path("orig/data.manifest.json"));
  json b = manifest_at(redo + "/data.manifest.json");
  a.erase("timing");
  b.erase("timing");
  CHECK(a == b);

  // A non-manifest JSON is rejected as a usage error.
  save_json(json{{"hello", 1}}, dir.path("not_a_manifest.json"));
  CHECK(run_cli(dir, "rerun " + dir.path("not_a_manifest.json")).code == 2);
}
