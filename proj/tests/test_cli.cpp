#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "mdlasso/io.hpp"
#include "mdlasso/types.hpp"

using namespace mdlasso;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("mdlasso_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct RunResult {
  int exit_code = -1;
  std::string output;
};

// Runs the built CLI and captures combined stdout/stderr.
RunResult run_cli(const TempDir& tmp, const std::string& args) {
  const fs::path log = tmp.path / "out.log";
  const std::string cmd = std::string(MDLASSO_CLI_PATH) + " " + args + " > " +
                          log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  r.output.assign(std::istreambuf_iterator<char>(in),
                  std::istreambuf_iterator<char>());
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("generate writes csv, response, and truth sidecar") {
  TempDir tmp;
  const std::string prefix = (tmp.path / "d").string();
  const auto r = run_cli(
      tmp, "generate --model identity --n 4 --p 3 --alpha 1 --seed 7 --out " + prefix);
  REQUIRE(r.exit_code == 0);
  const std::string csv = slurp(prefix + ".csv");
  CHECK(count_lines(csv) == 4);
  CHECK(csv.find("NA") == std::string::npos);

  const ModelTruth truth = io::read_truth(prefix + ".truth.json");
  CHECK(truth.beta0.size() == 3);
  CHECK(truth.s == 2);
  CHECK(truth.alpha == 1.0);

  const MaskedMatrix back = io::read_masked_csv(prefix + ".csv");
  CHECK(back.rows() == 4);
  CHECK(back.cols() == 3);
  CHECK(back.observed_fraction() == 1.0);
}

TEST_CASE("generate rejects alpha zero") {
  TempDir tmp;
  const auto r = run_cli(tmp, "generate --model identity --n 4 --p 3 --alpha 0 --out " +
                                  (tmp.path / "x").string());
  CHECK(r.exit_code != 0);
  CHECK(r.output.find("error[AlphaOutOfRange]") != std::string::npos);
}

TEST_CASE("generate is deterministic for a fixed seed") {
  TempDir tmp;
  const std::string a = (tmp.path / "a").string();
  const std::string b = (tmp.path / "b").string();
  const std::string flags = "generate --model ar1 --phi 0.4 --n 6 --p 5 --alpha 0.7 --seed 99 --out ";
  REQUIRE(run_cli(tmp, flags + a).exit_code == 0);
  REQUIRE(run_cli(tmp, flags + b).exit_code == 0);
  CHECK(slurp(a + ".csv") == slurp(b + ".csv"));
  CHECK(slurp(a + ".y") == slurp(b + ".y"));
  CHECK(slurp(a + ".truth.json") == slurp(b + ".truth.json"));
}

TEST_CASE("impute zero replaces NA cells") {
  TempDir tmp;
  const fs::path in = tmp.path / "in.csv";
  std::ofstream(in) << "1.5,NA\nNA,2.5\n";
  const fs::path out = tmp.path / "out.csv";
  const auto r = run_cli(tmp, "impute --method zero --input " + in.string() +
                                  " --output " + out.string());
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(out) == "1.5,0\n0,2.5\n");
}

TEST_CASE("impute ar1 surfaces the degenerate estimator") {
  TempDir tmp;
  const fs::path in = tmp.path / "in.csv";
  std::ofstream(in) << "NA,NA\nNA,NA\n";
  const auto r = run_cli(tmp, "impute --method ar1 --estimate-phi --alpha 0.5 --input " +
                                  in.string() + " --output " +
                                  (tmp.path / "o.csv").string());
  CHECK(r.exit_code == 4);  // numeric
  CHECK(r.output.find("error[DegenerateDenominator]") != std::string::npos);
}

TEST_CASE("graphical imputation requires a graph file") {
  TempDir tmp;
  const fs::path in = tmp.path / "in.csv";
  std::ofstream(in) << "1.0,NA\n";
  const auto r = run_cli(tmp, "impute --method graphical --alpha 0.5 --input " +
                                  in.string() + " --output " +
                                  (tmp.path / "o.csv").string());
  CHECK(r.exit_code == 2);  // usage
  CHECK(r.output.find("error[MethodRequirementsMissing]") != std::string::npos);
}

TEST_CASE("graphical imputation end to end with a graph file") {
  TempDir tmp;
  const std::string prefix = (tmp.path / "g").string();
  REQUIRE(run_cli(tmp, "generate --model banded --phi 0.25 --bandwidth 2 --n 40 "
                       "--p 8 --alpha 0.7 --seed 3 --out " + prefix)
              .exit_code == 0);
  REQUIRE(fs::exists(prefix + ".graph"));
  const auto r = run_cli(tmp, "impute --method graphical --alpha 0.7 --graph " +
                                  prefix + ".graph --input " + prefix +
                                  ".csv --output " + (tmp.path / "o.csv").string());
  REQUIRE(r.exit_code == 0);
  const std::string imputed = slurp(tmp.path / "o.csv");
  CHECK(imputed.find("NA") == std::string::npos);
}

TEST_CASE("fit with a huge penalty returns all zeros") {
  TempDir tmp;
  const std::string prefix = (tmp.path / "f").string();
  REQUIRE(run_cli(tmp, "generate --model identity --n 20 --p 6 --alpha 1 --seed 5 "
                       "--out " + prefix).exit_code == 0);
  const auto r = run_cli(tmp, "fit --design " + prefix + ".csv --response " +
                                  prefix + ".y --lambda 1e9 --out " +
                                  (tmp.path / "beta.txt").string());
  REQUIRE(r.exit_code == 0);
  const VectorXd beta = io::read_vector(tmp.path / "beta.txt");
  CHECK(beta.cwiseAbs().sum() == 0.0);
  CHECK(r.output.find("support 0") != std::string::npos);
}

TEST_CASE("pivotal schedule reports the same lambda for different sigma") {
  TempDir tmp;
  const std::string prefix = (tmp.path / "p").string();
  REQUIRE(run_cli(tmp, "generate --model identity --n 30 --p 10 --alpha 0.8 --seed 6 "
                       "--out " + prefix).exit_code == 0);
  REQUIRE(run_cli(tmp, "impute --method zero --input " + prefix + ".csv --output " +
                           prefix + ".imp.csv").exit_code == 0);
  auto lambda_line = [&](const std::string& sigma) {
    const auto r = run_cli(
        tmp, "fit --solver sqrt-lasso --design " + prefix + ".imp.csv --response " +
                 prefix + ".y --schedule sqrt-pivotal --sigma-x 1 --sigma " + sigma +
                 " --out " + (tmp.path / "b.txt").string());
    REQUIRE(r.exit_code == 0);
    const auto pos = r.output.find("lambda ");
    REQUIRE(pos != std::string::npos);
    return r.output.substr(pos, r.output.find('\n', pos) - pos);
  };
  CHECK(lambda_line("0.1") == lambda_line("1.0"));
}

TEST_CASE("malformed csv is a data error") {
  TempDir tmp;
  const fs::path in = tmp.path / "bad.csv";
  std::ofstream(in) << "1.0,2.0\n3.0,banana\n";
  const auto r = run_cli(tmp, "fit --design " + in.string() + " --response " +
                                  in.string() + " --lambda 0.1 --out " +
                                  (tmp.path / "b.txt").string());
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("error[UnreadableInput]") != std::string::npos);
}

TEST_CASE("experiment subcommand emits one row per alpha") {
  TempDir tmp;
  const fs::path dat = tmp.path / "fig1.dat";
  const auto r = run_cli(tmp,
                         "experiment --experiment fig1 --n 60 --p 40 --trials 2 "
                         "--alphas 0.5,0.7,0.9 --seed 11 --out " + dat.string());
  REQUIRE(r.exit_code == 0);
  const std::string table = slurp(dat);
  CHECK(count_lines(table) == 4);  // header + 3 rows
  CHECK(table.rfind("alpha err max_err min_err", 0) == 0);
}

TEST_CASE("experiment reruns are byte identical") {
  TempDir tmp;
  const fs::path a = tmp.path / "a.dat";
  const fs::path b = tmp.path / "b.dat";
  const std::string flags =
      "experiment --experiment fig2 --n 50 --p 30 --trials 2 --phi 0.1 "
      "--alphas 0.6,0.9 --seed 21 --out ";
  REQUIRE(run_cli(tmp, flags + a.string()).exit_code == 0);
  REQUIRE(run_cli(tmp, flags + b.string()).exit_code == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("unknown experiment is a usage error") {
  TempDir tmp;
  const auto r = run_cli(tmp, "experiment --experiment fig9");
  CHECK(r.exit_code == 2);
}

TEST_CASE("unknown subcommand is a usage error") {
  TempDir tmp;
  const auto r = run_cli(tmp, "frobnicate");
  CHECK(r.exit_code == 2);
}

TEST_CASE("config file values apply beneath flags") {
  TempDir tmp;
  const fs::path conf = tmp.path / "exp.ini";
  std::ofstream(conf) << "[experiment]\nexperiment=fig1\nn=60\np=40\ntrials=2\n"
                         "alphas=\"0.5,0.9\"\nseed=13\n";
  const fs::path a = tmp.path / "a.dat";
  const fs::path b = tmp.path / "b.dat";

  // all values from the config file
  REQUIRE(run_cli(tmp, "--config " + conf.string() + " experiment --out " +
                           a.string()).exit_code == 0);
  CHECK(count_lines(slurp(a)) == 3);  // header + 2 rows

  // a flag overrides the config value
  REQUIRE(run_cli(tmp, "--config " + conf.string() +
                           " experiment --alphas 0.5,0.7,0.9 --out " + b.string())
              .exit_code == 0);
  CHECK(count_lines(slurp(b)) == 4);
}

TEST_CASE("unknown config keys are rejected") {
  TempDir tmp;
  const fs::path conf = tmp.path / "bad.ini";
  std::ofstream(conf) << "[experiment]\nexperiment=fig1\nfrobnicate=1\n";
  const auto r = run_cli(tmp, "--config " + conf.string() + " experiment");
  CHECK(r.exit_code == 2);
}

TEST_CASE("fig3 p-list emits one table per dimension") {
  TempDir tmp;
  const fs::path out = tmp.path / "fig3.dat";
  const auto r = run_cli(tmp,
                         "experiment --experiment fig3 --n 60 --trials 2 --phi 0.25 "
                         "--bandwidth 2 --alphas 0.7 --seed 31 --p-list 20,30 --out " +
                             out.string());
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(tmp.path / "fig3_p20.dat"));
  CHECK(fs::exists(tmp.path / "fig3_p30.dat"));
  CHECK(count_lines(slurp(tmp.path / "fig3_p20.dat")) == 2);
}
