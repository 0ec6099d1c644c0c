#ifndef MDLASSO_SOLVERS_HPP
#define MDLASSO_SOLVERS_HPP

#include <optional>
#include <string>

#include "mdlasso/types.hpp"

namespace mdlasso::solvers {

// Regularization schedules.  Theory constants are folded into `scale`
// (default 1), matching the simulation convention of dropping universal
// prefactors.
//
//   IdentityMcar:     sqrt(alpha (1-alpha) log(p) / n)
//   SubGaussianMcar:  (sigma_x sigma + sigma_x^2 sqrt(1-alpha) R) sqrt(log(p)/n)
//   Mnar:             (sigma_x sigma + sigma_x^2 R) sqrt(log(p)/n)
//   Ar1:              (1/alpha^4) R sqrt(log(p)/n)
//   Ar1Theory:        (sigma_x sigma / alpha^2 + sigma_x^2 R / alpha^4) sqrt(log(p)/n)
//   Graphical:        sigma_x^2 sqrt((1-alpha) log(p) / n)
//                     (for Gaussian rows sigma_x^2 = lambda_max(Sigma_X))
//   SqrtLassoPivotal: sigma_x sqrt(log(p)/n)   -- contains neither sigma nor R
//   Manual:           value
enum class ScheduleKind {
  IdentityMcar,
  SubGaussianMcar,
  Mnar,
  Ar1,
  Ar1Theory,
  Graphical,
  SqrtLassoPivotal,
  Manual,
};

const char* schedule_kind_name(ScheduleKind k);
std::optional<ScheduleKind> schedule_kind_from_name(const std::string& name);

struct LambdaSchedule {
  ScheduleKind kind = ScheduleKind::Manual;
  std::optional<int> n;
  std::optional<int> p;
  std::optional<int> s;
  std::optional<double> alpha;
  std::optional<double> sigma;
  std::optional<double> sigma_x;
  std::optional<double> R;
  std::optional<double> value;  // Manual
  double scale = 1.0;
};

// scale times the schedule formula.  Throws MissingInput naming the first
// absent required field.
double lambda_value(const LambdaSchedule& sched);

// Cyclic coordinate descent for
//   min (1/2n) ||y - X beta||_2^2 + lambda ||beta||_1
// with exact soft-threshold updates in deterministic order 1..p.  Converged
// when the largest coordinate change in a full sweep is below tol and the
// KKT residual is below tol, where the residual is
//   max_j  max(|g_j| - lambda, 0)           (beta_j == 0)
//          |g_j + lambda sign(beta_j)|      (beta_j != 0)
// with g = (1/n) X^T (X beta - y).  On max_iter the best iterate is
// returned with converged = false.
FitResult fit_lasso(const RegressionProblem& problem);
FitResult fit_lasso_warm(const RegressionProblem& problem, VectorXd beta_init,
                         int* sweeps_used = nullptr);

// Square-root LASSO
//   min (1/sqrt(n)) ||y - X beta||_2 + lambda ||beta||_1
// solved by the scaled-lasso alternation: sigma_hat <- ||y - X beta||_2 /
// sqrt(n) (floored at 1e-12), beta <- lasso with penalty lambda*sigma_hat,
// until |sigma_{t+1} - sigma_t| < tol * max(sigma_t, 1).  If the residual
// hits the floor the iterate is returned with zero_residual_degenerate set.
FitResult fit_sqrt_lasso(const RegressionProblem& problem);

double soft_threshold(double z, double t);

// KKT residual of the plain-lasso stationarity conditions at beta.
double lasso_kkt_residual(const MatrixXd& X, const VectorXd& y,
                          const VectorXd& beta, double lambda);
double lasso_objective(const MatrixXd& X, const VectorXd& y,
                       const VectorXd& beta, double lambda);
double sqrt_lasso_objective(const MatrixXd& X, const VectorXd& y,
                            const VectorXd& beta, double lambda);

}  // namespace mdlasso::solvers

#endif
