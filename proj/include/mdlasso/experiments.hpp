#ifndef MDLASSO_EXPERIMENTS_HPP
#define MDLASSO_EXPERIMENTS_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mdlasso/rng.hpp"
#include "mdlasso/types.hpp"

namespace mdlasso::experiments {

enum class ExperimentKind {
  Fig1IdentityMcar,
  Fig2Ar1,
  Fig3Banded,
  SqrtLassoPivotality,
  MnarDemo,
};

const char* experiment_kind_name(ExperimentKind k);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Fig1IdentityMcar;
  int n = 400;
  int p = 480;
  int trials = 20;
  std::vector<double> alpha_grid = {0.6, 0.7, 0.8, 0.9, 0.95, 1.0};
  RngSeed seed{20240601};
  double sigma = 0.0;
  double lambda_scale = 1.0;
  // Schedules can evaluate to exactly 0 (e.g. alpha = 1 under the
  // identity-MCAR rule).  Coordinate descent at lambda = 0 on an
  // underdetermined noiseless problem stops at an arbitrary interpolator,
  // so sweeps floor the penalty to realize the lambda -> 0+ limit instead.
  double lambda_floor = 1e-4;
  double phi = 0.05;      // Fig2 / Fig3
  int bandwidth = 3;      // Fig3
  std::vector<int> p_list;  // Fig3: when nonempty, one sweep (and table) per p
  int threads = 0;        // 0 = OpenMP default; 1 = serial
};

// One aggregated grid point.  err is the mean l2 error ||beta_hat - beta0||
// over trials; min/max are the extremes.  The apx_* columns hold the same
// statistics for the estimated-parameter imputer when the experiment has
// one.
struct SweepRow {
  double alpha = 0.0;
  double err = 0.0;
  double min_err = 0.0;
  double max_err = 0.0;
  std::optional<double> apx_err;
  std::optional<double> apx_min_err;
  std::optional<double> apx_max_err;
};

// Identity-covariance Gaussian design, noiseless response, MCAR mask,
// zero-imputation, LASSO with the IdentityMcar schedule.
std::vector<SweepRow> run_fig1(const ExperimentConfig& cfg);

// AR(1) design; err columns use the true phi, apx columns the estimated
// phi_hat; lambda from the Ar1 schedule.
std::vector<SweepRow> run_fig2_ar1(const ExperimentConfig& cfg);

// Banded-precision design; err columns use the exact covariance, apx
// columns the unbiased plug-in estimate; lambda from the Graphical schedule.
std::vector<SweepRow> run_fig3_banded(const ExperimentConfig& cfg);

// Row-pattern MNAR demo on the identity design: patterns drawn i.i.d. per
// row (independent of the values), zero-imputation (the exact conditional
// mean for identity covariance), LASSO with the Mnar schedule.
std::vector<SweepRow> run_mnar_demo(const ExperimentConfig& cfg);

struct PivotalityCell {
  double sigma = 0.0;
  double R = 0.0;
  double lambda = 0.0;
  double effective_noise = 0.0;  // sigma + R sqrt(1-alpha)
  double err = 0.0;
  double min_err = 0.0;
  double max_err = 0.0;
};

struct PivotalityReport {
  double alpha = 0.0;
  double lambda = 0.0;  // shared by every cell, by construction
  std::vector<PivotalityCell> cells;
  double loglog_slope = 0.0;  // log err vs log effective_noise
};

// Fixed pivotal lambda; sweeps sigma in {0.1, 0.5, 1.0} and R in {1, 5} at
// alpha = alpha_grid.front() and checks the error growth against the
// effective noise scale.
PivotalityReport run_sqrt_pivotality(const ExperimentConfig& cfg);

// Whitespace-separated table with a header row; 12 significant digits;
// byte-identical output for identical rows.
void emit_dat(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
void emit_pivotality_dat(const PivotalityReport& report,
                         const std::filesystem::path& path);

std::string format_dat(const std::vector<SweepRow>& rows);
std::string format_pivotality_dat(const PivotalityReport& report);

}  // namespace mdlasso::experiments

#endif
