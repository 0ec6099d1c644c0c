#include "mdlasso/solvers.hpp"

#include <cmath>

namespace mdlasso::solvers {

namespace {

double require(const std::optional<double>& field, const char* name) {
  if (!field)
    throw Error(Err::MissingInput, std::string("schedule requires ") + name);
  return *field;
}

int require_int(const std::optional<int>& field, const char* name) {
  if (!field)
    throw Error(Err::MissingInput, std::string("schedule requires ") + name);
  return *field;
}

}  // namespace

const char* schedule_kind_name(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::IdentityMcar: return "identity-mcar";
    case ScheduleKind::SubGaussianMcar: return "subgaussian-mcar";
    case ScheduleKind::Mnar: return "mnar";
    case ScheduleKind::Ar1: return "ar1";
    case ScheduleKind::Ar1Theory: return "ar1-theory";
    case ScheduleKind::Graphical: return "graphical";
    case ScheduleKind::SqrtLassoPivotal: return "sqrt-pivotal";
    case ScheduleKind::Manual: return "manual";
  }
  return "unknown";
}

std::optional<ScheduleKind> schedule_kind_from_name(const std::string& name) {
  for (ScheduleKind k :
       {ScheduleKind::IdentityMcar, ScheduleKind::SubGaussianMcar,
        ScheduleKind::Mnar, ScheduleKind::Ar1, ScheduleKind::Ar1Theory,
        ScheduleKind::Graphical, ScheduleKind::SqrtLassoPivotal,
        ScheduleKind::Manual})
    if (name == schedule_kind_name(k)) return k;
  return std::nullopt;
}

double lambda_value(const LambdaSchedule& sched) {
  if (sched.kind == ScheduleKind::Manual)
    return sched.scale * require(sched.value, "value");

  const int n = require_int(sched.n, "n");
  const int p = require_int(sched.p, "p");
  if (n < 2 || p < 2)
    throw Error(Err::UsageError, "schedules need n, p >= 2");
  const double rate = std::sqrt(std::log(static_cast<double>(p)) / n);

  double base = 0.0;
  switch (sched.kind) {
    case ScheduleKind::IdentityMcar: {
      const double alpha = require(sched.alpha, "alpha");
      base = std::sqrt(alpha * (1.0 - alpha)) * rate;
      break;
    }
    case ScheduleKind::SubGaussianMcar: {
      const double alpha = require(sched.alpha, "alpha");
      const double sigma = require(sched.sigma, "sigma");
      const double sigma_x = require(sched.sigma_x, "sigma_x");
      const double R = require(sched.R, "R");
      base = (sigma_x * sigma + sigma_x * sigma_x * std::sqrt(1.0 - alpha) * R) * rate;
      break;
    }
    case ScheduleKind::Mnar: {
      const double sigma = require(sched.sigma, "sigma");
      const double sigma_x = require(sched.sigma_x, "sigma_x");
      const double R = require(sched.R, "R");
      base = (sigma_x * sigma + sigma_x * sigma_x * R) * rate;
      break;
    }
    case ScheduleKind::Ar1: {
      const double alpha = require(sched.alpha, "alpha");
      const double R = require(sched.R, "R");
      base = R * rate / (alpha * alpha * alpha * alpha);
      break;
    }
    case ScheduleKind::Ar1Theory: {
      const double alpha = require(sched.alpha, "alpha");
      const double sigma = require(sched.sigma, "sigma");
      const double sigma_x = require(sched.sigma_x, "sigma_x");
      const double R = require(sched.R, "R");
      const double a2 = alpha * alpha;
      base = (sigma_x * sigma / a2 + sigma_x * sigma_x * R / (a2 * a2)) * rate;
      break;
    }
    case ScheduleKind::Graphical: {
      // sigma_x^2 plays the role of lambda_max(Sigma_X) for Gaussian rows.
      const double alpha = require(sched.alpha, "alpha");
      const double sigma_x = require(sched.sigma_x, "sigma_x");
      base = sigma_x * sigma_x * std::sqrt(1.0 - alpha) * rate;
      break;
    }
    case ScheduleKind::SqrtLassoPivotal: {
      const double sigma_x = require(sched.sigma_x, "sigma_x");
      base = sigma_x * rate;
      break;
    }
    case ScheduleKind::Manual:
      break;  // handled above
  }
  return sched.scale * base;
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double lasso_objective(const MatrixXd& X, const VectorXd& y,
                       const VectorXd& beta, double lambda) {
  const double n = static_cast<double>(X.rows());
  return (y - X * beta).squaredNorm() / (2.0 * n) +
         lambda * beta.lpNorm<1>();
}

double sqrt_lasso_objective(const MatrixXd& X, const VectorXd& y,
                            const VectorXd& beta, double lambda) {
  const double n = static_cast<double>(X.rows());
  return (y - X * beta).norm() / std::sqrt(n) + lambda * beta.lpNorm<1>();
}

double lasso_kkt_residual(const MatrixXd& X, const VectorXd& y,
                          const VectorXd& beta, double lambda) {
  const double n = static_cast<double>(X.rows());
  const VectorXd g = X.transpose() * (X * beta - y) / n;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    double v;
    if (beta(j) == 0.0)
      v = std::max(std::abs(g(j)) - lambda, 0.0);
    else
      v = std::abs(g(j) + lambda * (beta(j) > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

// Optional centering/scaling wrapper.  The solver runs on the transformed
// problem; coefficients map back to the original coordinates and the
// intercept absorbs the means.
struct Standardizer {
  bool center = false;
  bool scale = false;
  VectorXd col_mean;
  VectorXd col_scale;
  double y_mean = 0.0;

  static Standardizer fit(const RegressionProblem& problem) {
    Standardizer st;
    st.center = problem.fit_intercept;
    st.scale = problem.standardize;
    const MatrixXd& X = problem.design;
    const double n = static_cast<double>(X.rows());
    st.col_mean = st.center ? VectorXd(X.colwise().mean())
                            : VectorXd(VectorXd::Zero(X.cols()));
    st.y_mean = st.center ? problem.response.mean() : 0.0;
    st.col_scale = VectorXd::Ones(X.cols());
    if (st.scale) {
      for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double ss =
            (X.col(j).array() - st.col_mean(j)).square().sum() / n;
        if (ss > 0) st.col_scale(j) = std::sqrt(ss);
      }
    }
    return st;
  }

  RegressionProblem transform(const RegressionProblem& problem) const {
    RegressionProblem out = problem;
    out.fit_intercept = false;
    out.standardize = false;
    out.design = (problem.design.rowwise() - col_mean.transpose()) *
                 col_scale.cwiseInverse().asDiagonal();
    out.response = problem.response.array() - y_mean;
    return out;
  }

  VectorXd to_transformed(const VectorXd& beta) const {
    return beta.size() == col_scale.size() ? VectorXd(beta.cwiseProduct(col_scale))
                                           : beta;
  }

  void map_back(FitResult& fit) const {
    fit.beta = fit.beta.cwiseQuotient(col_scale);
    fit.intercept = y_mean - col_mean.dot(fit.beta);
  }
};

// One cyclic sweep over the given coordinate set; returns the largest
// coordinate change.  The residual r = y - X beta is kept in sync.
double sweep(const MatrixXd& X, const VectorXd& colsq, double lambda, double n,
             const std::vector<int>& coords, VectorXd& beta, VectorXd& r) {
  double max_change = 0.0;
  for (int j : coords) {
    if (colsq(j) == 0.0) {
      if (beta(j) != 0.0) {
        r += X.col(j) * beta(j);
        max_change = std::max(max_change, std::abs(beta(j)));
        beta(j) = 0.0;
      }
      continue;
    }
    const double z = X.col(j).dot(r) / n + colsq(j) * beta(j);
    const double bnew = soft_threshold(z, lambda) / colsq(j);
    const double delta = bnew - beta(j);
    if (delta != 0.0) {
      r -= X.col(j) * delta;
      beta(j) = bnew;
      max_change = std::max(max_change, std::abs(delta));
    }
  }
  return max_change;
}

}  // namespace

FitResult fit_lasso_warm(const RegressionProblem& problem, VectorXd beta_init,
                         int* sweeps_used) {
  validate(problem);
  if (problem.fit_intercept || problem.standardize) {
    const Standardizer st = Standardizer::fit(problem);
    FitResult fit = fit_lasso_warm(st.transform(problem),
                                   st.to_transformed(beta_init), sweeps_used);
    st.map_back(fit);
    return fit;
  }
  const MatrixXd& X = problem.design;
  const VectorXd& y = problem.response;
  const double n = static_cast<double>(X.rows());
  const Eigen::Index p = X.cols();
  const double lambda = problem.lambda;

  VectorXd beta = beta_init.size() == p ? std::move(beta_init) : VectorXd::Zero(p);
  VectorXd r = y - X * beta;
  VectorXd colsq(p);
  for (Eigen::Index j = 0; j < p; ++j) colsq(j) = X.col(j).squaredNorm() / n;

  std::vector<int> all_coords(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) all_coords[static_cast<std::size_t>(j)] = static_cast<int>(j);

  FitResult out;
  int sweeps = 0;
  bool done = false;
  while (sweeps < problem.max_iter && !done) {
    double change = sweep(X, colsq, lambda, n, all_coords, beta, r);
    ++sweeps;
    // Iterate the active set until it is stable, then re-check the full
    // problem; coordinates enter only through full sweeps.
    std::vector<int> active;
    for (Eigen::Index j = 0; j < p; ++j)
      if (beta(j) != 0.0) active.push_back(static_cast<int>(j));
    while (change >= problem.tol && !active.empty() && sweeps < problem.max_iter) {
      change = sweep(X, colsq, lambda, n, active, beta, r);
      ++sweeps;
    }
    if (change < problem.tol) {
      const double kkt = lasso_kkt_residual(X, y, beta, lambda);
      if (kkt < problem.tol) {
        out.converged = true;
        out.kkt_residual = kkt;
        done = true;
      }
    }
  }
  if (!out.converged)
    out.kkt_residual = lasso_kkt_residual(X, y, beta, lambda);
  out.beta = std::move(beta);
  out.objective = lasso_objective(X, y, out.beta, lambda);
  out.iters = sweeps;
  if (sweeps_used) *sweeps_used = sweeps;
  return out;
}

FitResult fit_lasso(const RegressionProblem& problem) {
  return fit_lasso_warm(problem, VectorXd(), nullptr);
}

FitResult fit_sqrt_lasso(const RegressionProblem& problem) {
  validate(problem);
  if (problem.fit_intercept || problem.standardize) {
    const Standardizer st = Standardizer::fit(problem);
    FitResult fit = fit_sqrt_lasso(st.transform(problem));
    st.map_back(fit);
    return fit;
  }
  const MatrixXd& X = problem.design;
  const VectorXd& y = problem.response;
  const double n = static_cast<double>(X.rows());
  const double sqrt_n = std::sqrt(n);
  constexpr double kSigmaFloor = 1e-12;
  constexpr int kMaxOuter = 200;

  VectorXd beta = VectorXd::Zero(X.cols());
  double sigma_hat = std::max((y - X * beta).norm() / sqrt_n, kSigmaFloor);
  bool degenerate = (y.norm() / sqrt_n) <= kSigmaFloor;
  bool converged = degenerate;  // beta = 0 already interpolates

  FitResult inner;
  int total_sweeps = 0;
  for (int outer = 0; outer < kMaxOuter && !degenerate; ++outer) {
    RegressionProblem sub = problem;
    sub.lambda = problem.lambda * sigma_hat;
    sub.max_iter = std::max(1, problem.max_iter - total_sweeps);
    int sweeps = 0;
    inner = fit_lasso_warm(sub, beta, &sweeps);
    total_sweeps += sweeps;
    beta = inner.beta;
    const double sigma_next = (y - X * beta).norm() / sqrt_n;
    if (sigma_next <= kSigmaFloor) {
      degenerate = true;
      sigma_hat = kSigmaFloor;
      converged = inner.converged;
      break;
    }
    if (std::abs(sigma_next - sigma_hat) < problem.tol * std::max(sigma_hat, 1.0)) {
      sigma_hat = sigma_next;
      converged = inner.converged;
      break;
    }
    sigma_hat = sigma_next;
    if (total_sweeps >= problem.max_iter) break;
  }

  FitResult out;
  out.beta = std::move(beta);
  out.objective = sqrt_lasso_objective(X, y, out.beta, problem.lambda);
  out.iters = total_sweeps;
  out.zero_residual_degenerate = degenerate;
  const VectorXd r = y - X * out.beta;
  const double res_norm = r.norm() / sqrt_n;
  if (res_norm > kSigmaFloor) {
    // Stationarity of the square-root objective, expressed through the
    // equivalent lasso conditions at penalty lambda * sigma_hat.
    const VectorXd g = X.transpose() * (X * out.beta - y) / n;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < out.beta.size(); ++j) {
      double v;
      const double lam_eff = problem.lambda * res_norm;
      if (out.beta(j) == 0.0)
        v = std::max(std::abs(g(j)) - lam_eff, 0.0);
      else
        v = std::abs(g(j) + lam_eff * (out.beta(j) > 0 ? 1.0 : -1.0));
      worst = std::max(worst, v / std::max(res_norm, 1e-300));
    }
    out.kkt_residual = worst;
  } else {
    out.kkt_residual = (X.transpose() * r / n).lpNorm<Eigen::Infinity>();
  }
  out.converged = converged;
  return out;
}

}  // namespace mdlasso::solvers
