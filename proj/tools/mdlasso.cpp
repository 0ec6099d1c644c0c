// Command-line front end: synthetic data generation, imputation, penalized
// fits, and the Monte Carlo sweeps, over CSV files with NA missing markers.
//
// Exit codes: 0 ok, 2 usage, 3 data, 4 numeric.

#include <CLI11.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mdlasso/experiments.hpp"
#include "mdlasso/impute.hpp"
#include "mdlasso/io.hpp"
#include "mdlasso/solvers.hpp"
#include "mdlasso/synth.hpp"

namespace {

using namespace mdlasso;

std::vector<double> parse_alpha_list(const std::string& csv) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    const std::string tok = csv.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) {
      try {
        out.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw Error(Err::UsageError, "bad alpha value '" + tok + "'");
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw Error(Err::UsageError, "empty alpha list");
  return out;
}

int run_generate(const std::string& model, int n, int p, double alpha,
                 double phi, int bandwidth, double sigma, std::uint64_t seed,
                 const std::string& out_prefix) {
  RngSeed base{seed};
  ModelTruth truth;
  MatrixXd X;
  if (model == "identity") {
    X = synth::gen_identity_gaussian(n, p, derive_seed(base, 0));
    truth.covariance_kind = CovarianceKind::Identity;
    truth.sigma_x = 1.0;
  } else if (model == "ar1") {
    X = synth::gen_ar1(n, p, phi, derive_seed(base, 0));
    truth.covariance_kind = CovarianceKind::Ar1;
    truth.phi = phi;
    truth.sigma_x = 1.0 / std::sqrt(1.0 - phi * phi);
  } else if (model == "banded") {
    auto design = synth::gen_banded_precision(n, p, phi, bandwidth, derive_seed(base, 0));
    X = std::move(design.X);
    io::write_graph(design.graph, out_prefix + ".graph");
    truth.covariance_kind = CovarianceKind::BandedPrecision;
    truth.phi = phi;
    truth.bandwidth = bandwidth;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(design.sigma);
    truth.sigma_x = std::sqrt(eig.eigenvalues().maxCoeff());
  } else {
    throw Error(Err::UsageError, "unknown model '" + model + "'");
  }

  auto [beta0, s] = synth::gen_beta0_sqrt_sparsity(p);
  truth.beta0 = beta0;
  truth.s = s;
  truth.R = beta0.norm();
  truth.sigma = sigma;
  truth.alpha = alpha;
  validate(truth);

  const VectorXd y = synth::gen_response(X, beta0, sigma, derive_seed(base, 2));
  const MaskedMatrix Z = synth::apply_mcar(X, alpha, derive_seed(base, 1));

  io::write_masked_csv(Z, out_prefix + ".csv");
  io::write_vector(y, out_prefix + ".y");
  io::write_truth(truth, out_prefix + ".truth.json");
  std::cout << "wrote " << out_prefix << ".csv (" << n << "x" << p
            << ", observed fraction " << Z.observed_fraction() << "), "
            << out_prefix << ".y, " << out_prefix << ".truth.json\n";
  return 0;
}

int run_impute(const std::string& method, const std::string& input,
               const std::string& output, std::optional<double> phi,
               bool estimate_phi_flag, std::optional<double> alpha,
               const std::string& graph_file, const std::string& cov_file) {
  const MaskedMatrix Z = io::read_masked_csv(input);
  ImputedMatrix imputed;
  if (method == "zero") {
    imputed = impute::zero_impute(Z);
  } else if (method == "ar1") {
    impute::Ar1Params params;
    if (estimate_phi_flag) {
      if (!alpha)
        throw Error(Err::MethodRequirementsMissing,
                    "--estimate-phi requires --alpha");
      params = impute::estimate_phi(Z, *alpha);
      std::cout << "phi_hat = " << params.phi << "\n";
    } else if (phi) {
      params = impute::Ar1Params{*phi, false};
    } else {
      throw Error(Err::MethodRequirementsMissing,
                  "ar1 imputation needs --phi or --estimate-phi");
    }
    imputed = impute::ar1_impute(Z, params);
  } else if (method == "graphical") {
    if (graph_file.empty())
      throw Error(Err::MethodRequirementsMissing,
                  "graphical imputation needs --graph");
    const SparsityGraph graph = io::read_graph(graph_file);
    if (!cov_file.empty()) {
      imputed = impute::graphical_impute(Z, graph, io::read_dense_csv(cov_file));
    } else {
      if (!alpha)
        throw Error(Err::MethodRequirementsMissing,
                    "graphical imputation needs --cov or --alpha (for the "
                    "plug-in covariance estimate)");
      imputed = impute::graphical_impute(Z, graph,
                                         impute::estimate_covariance_mcar(Z, *alpha));
    }
  } else {
    throw Error(Err::UsageError, "unknown method '" + method + "'");
  }
  io::write_dense_csv(imputed.data, output);
  std::cout << "wrote " << output << " (source "
            << impute_source_name(imputed.source) << ")\n";
  return 0;
}

int run_fit(const std::string& design_file, const std::string& response_file,
            const std::string& solver, std::optional<double> lambda,
            const std::string& schedule, const solvers::LambdaSchedule& inputs,
            double scale, double tol, int max_iter, bool intercept,
            bool standardize, const std::string& out_file) {
  RegressionProblem problem;
  problem.design = io::read_dense_csv(design_file);
  problem.response = io::read_vector(response_file);
  problem.tol = tol;
  problem.max_iter = max_iter;
  problem.fit_intercept = intercept;
  problem.standardize = standardize;

  if (lambda && !schedule.empty())
    throw Error(Err::UsageError, "give either --lambda or --schedule, not both");
  if (lambda) {
    problem.lambda = *lambda;
  } else if (!schedule.empty()) {
    auto kind = solvers::schedule_kind_from_name(schedule);
    if (!kind) throw Error(Err::UsageError, "unknown schedule '" + schedule + "'");
    solvers::LambdaSchedule sched = inputs;
    sched.kind = *kind;
    sched.scale = scale;
    if (!sched.n) sched.n = static_cast<int>(problem.design.rows());
    if (!sched.p) sched.p = static_cast<int>(problem.design.cols());
    problem.lambda = solvers::lambda_value(sched);
  } else {
    throw Error(Err::UsageError, "need --lambda or --schedule");
  }

  FitResult fit;
  if (solver == "lasso") {
    problem.solver = SolverKind::Lasso;
    fit = solvers::fit_lasso(problem);
  } else if (solver == "sqrt-lasso") {
    problem.solver = SolverKind::SqrtLasso;
    fit = solvers::fit_sqrt_lasso(problem);
  } else {
    throw Error(Err::UsageError, "unknown solver '" + solver + "'");
  }

  io::write_vector(fit.beta, out_file);
  int support = 0;
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j)
    if (fit.beta(j) != 0.0) ++support;
  std::cout << "lambda " << problem.lambda << "\n";
  if (problem.fit_intercept) std::cout << "intercept " << fit.intercept << "\n";
  std::cout << "objective " << fit.objective << "\n"
            << "kkt_residual " << fit.kkt_residual << "\n"
            << "iters " << fit.iters << "\n"
            << "converged " << (fit.converged ? "yes" : "no") << "\n"
            << "support " << support << "\n";
  if (fit.zero_residual_degenerate)
    std::cout << "note: residual hit the interpolation floor\n";
  std::cout << "wrote " << out_file << "\n";
  return 0;
}

int run_experiment(const std::string& name, experiments::ExperimentConfig cfg,
                   bool paper_scale, const std::string& out_file) {
  if (paper_scale) {
    cfg.n = 1000;
    cfg.p = 1200;
    cfg.trials = 100;
  }
  using experiments::ExperimentKind;
  if (name == "fig1") {
    cfg.experiment = ExperimentKind::Fig1IdentityMcar;
    experiments::emit_dat(experiments::run_fig1(cfg), out_file);
  } else if (name == "fig2") {
    cfg.experiment = ExperimentKind::Fig2Ar1;
    experiments::emit_dat(experiments::run_fig2_ar1(cfg), out_file);
  } else if (name == "fig3") {
    cfg.experiment = ExperimentKind::Fig3Banded;
    if (!cfg.p_list.empty()) {
      // one table per dimension, suffixed by p
      const auto stem = std::filesystem::path(out_file);
      for (int p : cfg.p_list) {
        experiments::ExperimentConfig sub = cfg;
        sub.p = p;
        auto path = stem;
        path.replace_extension();
        path += "_p" + std::to_string(p) + ".dat";
        experiments::emit_dat(experiments::run_fig3_banded(sub), path);
        std::cout << "wrote " << path.string() << "\n";
      }
      return 0;
    }
    experiments::emit_dat(experiments::run_fig3_banded(cfg), out_file);
  } else if (name == "sqrt-pivotal") {
    cfg.experiment = ExperimentKind::SqrtLassoPivotality;
    experiments::emit_pivotality_dat(experiments::run_sqrt_pivotality(cfg), out_file);
  } else if (name == "mnar") {
    cfg.experiment = ExperimentKind::MnarDemo;
    experiments::emit_dat(experiments::run_mnar_demo(cfg), out_file);
  } else {
    throw Error(Err::UsageError, "unknown experiment '" + name + "'");
  }
  std::cout << "wrote " << out_file << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Missing-data imputation and penalized regression toolkit"};
  app.require_subcommand(1);
  // flags override config-file values, which override defaults; unknown
  // config keys are rejected
  app.set_config("--config", "", "read options from an INI file");
  app.allow_config_extras(CLI::config_extras_mode::error);

  // generate
  auto* gen = app.add_subcommand("generate", "generate a synthetic masked design");
  std::string gen_model = "identity";
  int gen_n = 400, gen_p = 480, gen_bandwidth = 3;
  double gen_alpha = 0.9, gen_phi = 0.3, gen_sigma = 0.0;
  std::uint64_t gen_seed = 1;
  std::string gen_out = "data";
  gen->add_option("--model", gen_model, "identity|ar1|banded")->capture_default_str();
  gen->add_option("--n", gen_n)->capture_default_str();
  gen->add_option("--p", gen_p)->capture_default_str();
  gen->add_option("--alpha", gen_alpha, "observation probability")->capture_default_str();
  gen->add_option("--phi", gen_phi)->capture_default_str();
  gen->add_option("--bandwidth", gen_bandwidth)->capture_default_str();
  gen->add_option("--sigma", gen_sigma, "noise std")->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out", gen_out, "output prefix")->capture_default_str();

  // impute
  auto* imp = app.add_subcommand("impute", "fill missing cells of a CSV");
  std::string imp_method, imp_in, imp_out = "imputed.csv", imp_graph, imp_cov;
  std::optional<double> imp_phi, imp_alpha;
  bool imp_estimate = false;
  imp->add_option("--method", imp_method, "zero|ar1|graphical")->required();
  imp->add_option("--input", imp_in)->required();
  imp->add_option("--output", imp_out)->capture_default_str();
  imp->add_option("--phi", imp_phi, "AR(1) coefficient");
  imp->add_flag("--estimate-phi", imp_estimate, "estimate phi from the data");
  imp->add_option("--alpha", imp_alpha, "observation probability");
  imp->add_option("--graph", imp_graph, "edge-list adjacency file");
  imp->add_option("--cov", imp_cov, "exact covariance CSV");

  // fit
  auto* fit = app.add_subcommand("fit", "LASSO / square-root LASSO fit");
  std::string fit_design, fit_response, fit_solver = "lasso", fit_schedule,
              fit_out = "beta.txt";
  std::optional<double> fit_lambda;
  solvers::LambdaSchedule fit_inputs;
  double fit_scale = 1.0, fit_tol = 1e-8;
  int fit_max_iter = 100000;
  bool fit_intercept = false, fit_standardize = false;
  fit->add_option("--design", fit_design, "dense design CSV")->required();
  fit->add_option("--response", fit_response, "response, one value per line")->required();
  fit->add_option("--solver", fit_solver, "lasso|sqrt-lasso")->capture_default_str();
  fit->add_option("--lambda", fit_lambda, "explicit penalty");
  fit->add_option("--schedule", fit_schedule,
                  "identity-mcar|subgaussian-mcar|mnar|ar1|ar1-theory|graphical|"
                  "sqrt-pivotal|manual");
  fit->add_option("--alpha", fit_inputs.alpha);
  fit->add_option("--sigma", fit_inputs.sigma);
  fit->add_option("--sigma-x", fit_inputs.sigma_x);
  fit->add_option("--R", fit_inputs.R);
  fit->add_option("--s", fit_inputs.s);
  fit->add_option("--value", fit_inputs.value, "manual schedule value");
  fit->add_option("--scale", fit_scale, "schedule multiplier")->capture_default_str();
  fit->add_option("--tol", fit_tol)->capture_default_str();
  fit->add_option("--max-iter", fit_max_iter)->capture_default_str();
  fit->add_flag("--intercept", fit_intercept, "fit an unpenalized intercept");
  fit->add_flag("--standardize", fit_standardize, "scale columns to unit variance");
  fit->add_option("--out", fit_out)->capture_default_str();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Monte Carlo sweeps");
  std::string exp_name, exp_alphas, exp_out;
  experiments::ExperimentConfig cfg;
  bool paper_scale = false;
  exp->add_option("--experiment", exp_name, "fig1|fig2|fig3|sqrt-pivotal|mnar")->required();
  exp->add_option("--n", cfg.n)->capture_default_str();
  exp->add_option("--p", cfg.p)->capture_default_str();
  exp->add_option("--trials", cfg.trials)->capture_default_str();
  exp->add_option("--alphas", exp_alphas, "comma-separated alpha grid");
  exp->add_option("--seed", cfg.seed.value)->capture_default_str();
  exp->add_option("--sigma", cfg.sigma)->capture_default_str();
  exp->add_option("--lambda-scale", cfg.lambda_scale)->capture_default_str();
  exp->add_option("--phi", cfg.phi)->capture_default_str();
  exp->add_option("--bandwidth", cfg.bandwidth)->capture_default_str();
  exp->add_option("--threads", cfg.threads, "0 = all, 1 = serial")->capture_default_str();
  exp->add_flag("--paper-scale", paper_scale, "n=1000, p=1200, trials=100");
  exp->add_option("--p-list", cfg.p_list, "fig3: sweep these dimensions, one table each")
      ->delimiter(',');
  exp->add_option("--out", exp_out, ".dat output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed())
      return run_generate(gen_model, gen_n, gen_p, gen_alpha, gen_phi,
                          gen_bandwidth, gen_sigma, gen_seed, gen_out);
    if (imp->parsed())
      return run_impute(imp_method, imp_in, imp_out, imp_phi, imp_estimate,
                        imp_alpha, imp_graph, imp_cov);
    if (fit->parsed())
      return run_fit(fit_design, fit_response, fit_solver, fit_lambda,
                     fit_schedule, fit_inputs, fit_scale, fit_tol, fit_max_iter,
                     fit_intercept, fit_standardize, fit_out);
    if (exp->parsed()) {
      if (!exp_alphas.empty()) cfg.alpha_grid = parse_alpha_list(exp_alphas);
      if (exp_out.empty()) exp_out = exp_name + ".dat";
      return run_experiment(exp_name, cfg, paper_scale, exp_out);
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return static_cast<int>(e.err_class());
  } catch (const std::exception& e) {
    std::cerr << "error[Internal] " << e.what() << "\n";
    return 4;
  }
  return 2;
}
