#include "mdlasso/experiments.hpp"

#include <Eigen/Eigenvalues>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>

#include "mdlasso/impute.hpp"
#include "mdlasso/solvers.hpp"
#include "mdlasso/synth.hpp"

namespace mdlasso::experiments {

namespace {

using impute::Ar1Params;
using solvers::LambdaSchedule;
using solvers::ScheduleKind;

// Per-trial seed streams: design, mask, noise.  Keyed by (alpha index,
// trial index) so trial execution order cannot matter.
RngSeed trial_seed(const ExperimentConfig& cfg, std::size_t alpha_idx, int trial,
                   int sub) {
  const std::uint64_t stream = static_cast<std::uint64_t>(alpha_idx) * 1000003ULL +
                               static_cast<std::uint64_t>(trial) * 8ULL +
                               static_cast<std::uint64_t>(sub);
  return derive_seed(cfg.seed, stream);
}

struct TrialErrors {
  double err = 0.0;
  std::optional<double> apx_err;
};

struct Aggregate {
  double mean = 0.0, min = 0.0, max = 0.0;
};

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  a.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  a.min = *std::min_element(values.begin(), values.end());
  a.max = *std::max_element(values.begin(), values.end());
  return a;
}

// Runs `trials` independent replications, in parallel when configured, and
// aggregates by trial index.  The first failing trial aborts the sweep.
std::vector<TrialErrors> run_trials(const ExperimentConfig& cfg,
                                    const std::function<TrialErrors(int)>& trial_fn) {
  std::vector<TrialErrors> results(static_cast<std::size_t>(cfg.trials));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(cfg.trials));
  if (cfg.threads == 1) {
    for (int t = 0; t < cfg.trials; ++t) results[static_cast<std::size_t>(t)] = trial_fn(t);
  } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads( \
    cfg.threads > 0 ? cfg.threads : omp_get_max_threads())
#endif
    for (int t = 0; t < cfg.trials; ++t) {
      try {
        results[static_cast<std::size_t>(t)] = trial_fn(t);
      } catch (...) {
        failures[static_cast<std::size_t>(t)] = std::current_exception();
      }
    }
    for (const auto& f : failures)
      if (f) std::rethrow_exception(f);
  }
  return results;
}

SweepRow make_row(double alpha, const std::vector<TrialErrors>& trials) {
  std::vector<double> errs;
  std::vector<double> apx;
  errs.reserve(trials.size());
  for (const auto& t : trials) {
    errs.push_back(t.err);
    if (t.apx_err) apx.push_back(*t.apx_err);
  }
  SweepRow row;
  row.alpha = alpha;
  const Aggregate a = aggregate(errs);
  row.err = a.mean;
  row.min_err = a.min;
  row.max_err = a.max;
  if (!apx.empty()) {
    const Aggregate b = aggregate(apx);
    row.apx_err = b.mean;
    row.apx_min_err = b.min;
    row.apx_max_err = b.max;
  }
  return row;
}

double floored_lambda(const ExperimentConfig& cfg, const LambdaSchedule& sched) {
  return std::max(solvers::lambda_value(sched), cfg.lambda_floor);
}

FitResult fit_with_lambda(const MatrixXd& design, const VectorXd& y, double lambda) {
  RegressionProblem problem;
  problem.design = design;
  problem.response = y;
  problem.lambda = lambda;
  return solvers::fit_lasso(problem);
}

void check_config(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw Error(Err::UsageError, "trials must be >= 1");
  if (cfg.alpha_grid.empty())
    throw Error(Err::UsageError, "alpha grid must be nonempty");
  for (double a : cfg.alpha_grid)
    if (!(a > 0.0 && a <= 1.0))
      throw Error(Err::AlphaOutOfRange, "alpha grid entries must lie in (0, 1]");
}

}  // namespace

const char* experiment_kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Fig1IdentityMcar: return "fig1";
    case ExperimentKind::Fig2Ar1: return "fig2";
    case ExperimentKind::Fig3Banded: return "fig3";
    case ExperimentKind::SqrtLassoPivotality: return "sqrt-pivotal";
    case ExperimentKind::MnarDemo: return "mnar";
  }
  return "unknown";
}

std::vector<SweepRow> run_fig1(const ExperimentConfig& cfg) {
  check_config(cfg);
  const auto [beta0, s] = synth::gen_beta0_sqrt_sparsity(cfg.p);
  std::vector<SweepRow> rows;
  for (std::size_t ai = 0; ai < cfg.alpha_grid.size(); ++ai) {
    const double alpha = cfg.alpha_grid[ai];
    LambdaSchedule sched;
    sched.kind = ScheduleKind::IdentityMcar;
    sched.n = cfg.n;
    sched.p = cfg.p;
    sched.alpha = alpha;
    sched.scale = cfg.lambda_scale;
    const double lambda = floored_lambda(cfg, sched);
    auto trial_fn = [&, alpha](int t) {
      const MatrixXd X =
          synth::gen_identity_gaussian(cfg.n, cfg.p, trial_seed(cfg, ai, t, 0));
      const VectorXd y = synth::gen_response(X, beta0, cfg.sigma, trial_seed(cfg, ai, t, 2));
      const MaskedMatrix Z = synth::apply_mcar(X, alpha, trial_seed(cfg, ai, t, 1));
      const ImputedMatrix imputed = impute::zero_impute(Z);
      const FitResult fit = fit_with_lambda(imputed.data, y, lambda);
      return TrialErrors{(fit.beta - beta0).norm(), std::nullopt};
    };
    rows.push_back(make_row(alpha, run_trials(cfg, trial_fn)));
  }
  return rows;
}

std::vector<SweepRow> run_fig2_ar1(const ExperimentConfig& cfg) {
  check_config(cfg);
  const auto [beta0, s] = synth::gen_beta0_sqrt_sparsity(cfg.p);
  const double R = beta0.norm();
  std::vector<SweepRow> rows;
  for (std::size_t ai = 0; ai < cfg.alpha_grid.size(); ++ai) {
    const double alpha = cfg.alpha_grid[ai];
    LambdaSchedule sched;
    sched.kind = ScheduleKind::Ar1;
    sched.n = cfg.n;
    sched.p = cfg.p;
    sched.alpha = alpha;
    sched.R = R;
    sched.scale = cfg.lambda_scale;
    const double lambda = floored_lambda(cfg, sched);
    auto trial_fn = [&, alpha](int t) {
      const MatrixXd X = synth::gen_ar1(cfg.n, cfg.p, cfg.phi, trial_seed(cfg, ai, t, 0));
      const VectorXd y = synth::gen_response(X, beta0, cfg.sigma, trial_seed(cfg, ai, t, 2));
      const MaskedMatrix Z = synth::apply_mcar(X, alpha, trial_seed(cfg, ai, t, 1));

      const ImputedMatrix exact = impute::ar1_impute(Z, Ar1Params{cfg.phi, false});
      const FitResult fit_exact = fit_with_lambda(exact.data, y, lambda);

      const Ar1Params est = impute::estimate_phi(Z, alpha);
      const ImputedMatrix approx = impute::ar1_impute(Z, est);
      const FitResult fit_approx = fit_with_lambda(approx.data, y, lambda);

      return TrialErrors{(fit_exact.beta - beta0).norm(),
                         (fit_approx.beta - beta0).norm()};
    };
    rows.push_back(make_row(alpha, run_trials(cfg, trial_fn)));
  }
  return rows;
}

std::vector<SweepRow> run_fig3_banded(const ExperimentConfig& cfg) {
  check_config(cfg);
  const auto [beta0, s] = synth::gen_beta0_sqrt_sparsity(cfg.p);
  // lambda_max of the population covariance enters the schedule; one
  // eigendecomposition of the banded model serves the whole sweep.
  const auto probe =
      synth::gen_banded_precision(1, cfg.p, cfg.phi, cfg.bandwidth, RngSeed{0});
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(probe.sigma);
  const double sigma_max = eig.eigenvalues().maxCoeff();

  std::vector<SweepRow> rows;
  for (std::size_t ai = 0; ai < cfg.alpha_grid.size(); ++ai) {
    const double alpha = cfg.alpha_grid[ai];
    LambdaSchedule sched;
    sched.kind = ScheduleKind::Graphical;
    sched.n = cfg.n;
    sched.p = cfg.p;
    sched.alpha = alpha;
    sched.sigma_x = std::sqrt(sigma_max);
    sched.scale = cfg.lambda_scale;
    const double lambda = floored_lambda(cfg, sched);
    auto trial_fn = [&, alpha](int t) {
      const auto design = synth::gen_banded_precision(cfg.n, cfg.p, cfg.phi,
                                                      cfg.bandwidth,
                                                      trial_seed(cfg, ai, t, 0));
      const VectorXd y =
          synth::gen_response(design.X, beta0, cfg.sigma, trial_seed(cfg, ai, t, 2));
      const MaskedMatrix Z =
          synth::apply_mcar(design.X, alpha, trial_seed(cfg, ai, t, 1));

      const ImputedMatrix exact =
          impute::graphical_impute(Z, design.graph, design.sigma);
      const FitResult fit_exact = fit_with_lambda(exact.data, y, lambda);

      const auto est = impute::estimate_covariance_mcar(Z, alpha);
      const ImputedMatrix approx = impute::graphical_impute(Z, design.graph, est);
      const FitResult fit_approx = fit_with_lambda(approx.data, y, lambda);

      return TrialErrors{(fit_exact.beta - beta0).norm(),
                         (fit_approx.beta - beta0).norm()};
    };
    rows.push_back(make_row(alpha, run_trials(cfg, trial_fn)));
  }
  return rows;
}

std::vector<SweepRow> run_mnar_demo(const ExperimentConfig& cfg) {
  check_config(cfg);
  const auto [beta0, s] = synth::gen_beta0_sqrt_sparsity(cfg.p);
  const double R = beta0.norm();
  LambdaSchedule sched;
  sched.kind = ScheduleKind::Mnar;
  sched.n = cfg.n;
  sched.p = cfg.p;
  sched.sigma = cfg.sigma;
  sched.sigma_x = 1.0;
  sched.R = R;
  sched.scale = cfg.lambda_scale;
  const double lambda = floored_lambda(cfg, sched);

  std::vector<SweepRow> rows;
  for (std::size_t ai = 0; ai < cfg.alpha_grid.size(); ++ai) {
    const double alpha = cfg.alpha_grid[ai];
    // Rows are i.i.d. draws from a mixture of two value-independent
    // patterns with observed fraction ~alpha: a Bernoulli(alpha) pattern
    // and a contiguous block of missing coordinates.
    const int block = static_cast<int>(std::lround((1.0 - alpha) * cfg.p));
    auto trial_fn = [&, alpha, block](int t) {
      const MatrixXd X =
          synth::gen_identity_gaussian(cfg.n, cfg.p, trial_seed(cfg, ai, t, 0));
      const VectorXd y = synth::gen_response(X, beta0, cfg.sigma, trial_seed(cfg, ai, t, 2));
      auto bernoulli = synth::pattern_bernoulli(cfg.p, alpha);
      synth::PatternDist dist = [&, block](Rng& rng) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        if (unif(rng) < 0.5) return bernoulli(rng);
        MaskRow row(static_cast<std::size_t>(cfg.p), true);
        for (int a = 0; a < block; ++a) row[static_cast<std::size_t>(a)] = false;
        return row;
      };
      const MaskedMatrix Z =
          synth::apply_mnar_rowpattern(X, dist, trial_seed(cfg, ai, t, 1));
      const ImputedMatrix imputed = impute::zero_impute(Z);
      const FitResult fit = fit_with_lambda(imputed.data, y, lambda);
      return TrialErrors{(fit.beta - beta0).norm(), std::nullopt};
    };
    rows.push_back(make_row(alpha, run_trials(cfg, trial_fn)));
  }
  return rows;
}

PivotalityReport run_sqrt_pivotality(const ExperimentConfig& cfg) {
  check_config(cfg);
  const double alpha = cfg.alpha_grid.front();
  LambdaSchedule sched;
  sched.kind = ScheduleKind::SqrtLassoPivotal;
  sched.n = cfg.n;
  sched.p = cfg.p;
  sched.sigma_x = 1.0;
  sched.scale = cfg.lambda_scale;

  PivotalityReport report;
  report.alpha = alpha;
  report.lambda = solvers::lambda_value(sched);

  const auto [beta0_unit, s] = synth::gen_beta0_sqrt_sparsity(cfg.p);
  const std::vector<double> sigmas = {0.1, 0.5, 1.0};
  const std::vector<double> radii = {1.0, 5.0};

  std::size_t cell_idx = 0;
  for (double R : radii) {
    const VectorXd beta0 = beta0_unit * (R / beta0_unit.norm());
    for (double sigma : sigmas) {
      // The schedule depends on neither sigma nor R; recompute per cell to
      // let callers observe that the value is bit-identical.
      LambdaSchedule cell_sched = sched;
      cell_sched.sigma = sigma;
      cell_sched.R = R;
      const double lambda = solvers::lambda_value(cell_sched);

      auto trial_fn = [&](int t) {
        const MatrixXd X = synth::gen_identity_gaussian(
            cfg.n, cfg.p, trial_seed(cfg, cell_idx, t, 0));
        const VectorXd y =
            synth::gen_response(X, beta0, sigma, trial_seed(cfg, cell_idx, t, 2));
        const MaskedMatrix Z =
            synth::apply_mcar(X, alpha, trial_seed(cfg, cell_idx, t, 1));
        const ImputedMatrix imputed = impute::zero_impute(Z);
        RegressionProblem problem;
        problem.design = imputed.data;
        problem.response = y;
        problem.lambda = lambda;
        problem.solver = SolverKind::SqrtLasso;
        const FitResult fit = solvers::fit_sqrt_lasso(problem);
        return TrialErrors{(fit.beta - beta0).norm(), std::nullopt};
      };
      const auto trials = run_trials(cfg, trial_fn);
      std::vector<double> errs;
      errs.reserve(trials.size());
      for (const auto& t : trials) errs.push_back(t.err);
      const Aggregate a = aggregate(errs);

      PivotalityCell cell;
      cell.sigma = sigma;
      cell.R = R;
      cell.lambda = lambda;
      cell.effective_noise = sigma + R * std::sqrt(1.0 - alpha);
      cell.err = a.mean;
      cell.min_err = a.min;
      cell.max_err = a.max;
      report.cells.push_back(cell);
      ++cell_idx;
    }
  }

  // log-log regression of mean error on the effective noise scale
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto m = static_cast<double>(report.cells.size());
  for (const auto& c : report.cells) {
    const double x = std::log(c.effective_noise);
    const double y = std::log(c.err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  report.loglog_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return report;
}

namespace {

std::string format_sig12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string format_dat(const std::vector<SweepRow>& rows) {
  if (rows.empty())
    throw Error(Err::IoError, "no rows to emit");
  const bool has_apx = rows.front().apx_err.has_value();
  std::string out = "alpha err max_err min_err";
  if (has_apx) out += " apx_err apx_max_err apx_min_err";
  out += '\n';
  for (const auto& row : rows) {
    out += format_sig12(row.alpha) + ' ' + format_sig12(row.err) + ' ' +
           format_sig12(row.max_err) + ' ' + format_sig12(row.min_err);
    if (has_apx)
      out += ' ' + format_sig12(row.apx_err.value()) + ' ' +
             format_sig12(row.apx_max_err.value()) + ' ' +
             format_sig12(row.apx_min_err.value());
    out += '\n';
  }
  return out;
}

std::string format_pivotality_dat(const PivotalityReport& report) {
  std::string out = "sigma r lambda effective_noise err max_err min_err\n";
  for (const auto& c : report.cells) {
    out += format_sig12(c.sigma) + ' ' + format_sig12(c.R) + ' ' +
           format_sig12(c.lambda) + ' ' + format_sig12(c.effective_noise) + ' ' +
           format_sig12(c.err) + ' ' + format_sig12(c.max_err) + ' ' +
           format_sig12(c.min_err) + '\n';
  }
  return out;
}

void emit_dat(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  const std::string content = format_dat(rows);  // fails before creating the file
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Err::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(Err::IoError, "short write to " + path.string());
}

void emit_pivotality_dat(const PivotalityReport& report,
                         const std::filesystem::path& path) {
  const std::string content = format_pivotality_dat(report);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Err::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(Err::IoError, "short write to " + path.string());
}

}  // namespace mdlasso::experiments
