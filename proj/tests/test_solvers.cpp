#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/QR>

#include <cmath>
#include <random>

#include "mdlasso/impute.hpp"
#include "mdlasso/solvers.hpp"
#include "mdlasso/synth.hpp"
#include "oracles.hpp"

using namespace mdlasso;
using namespace mdlasso::solvers;

namespace {

RegressionProblem make_problem(MatrixXd X, VectorXd y, double lambda) {
  RegressionProblem problem;
  problem.design = std::move(X);
  problem.response = std::move(y);
  problem.lambda = lambda;
  return problem;
}

}  // namespace

TEST_CASE("lambda schedules") {
  SUBCASE("identity-mcar worked arithmetic") {
    LambdaSchedule sched;
    sched.kind = ScheduleKind::IdentityMcar;
    sched.n = 1000;
    sched.p = 1200;
    sched.alpha = 0.5;
    CHECK(std::abs(lambda_value(sched) - 0.0421013) < 1e-5);
  }
  SUBCASE("identity-mcar vanishes at alpha=1") {
    LambdaSchedule sched;
    sched.kind = ScheduleKind::IdentityMcar;
    sched.n = 400;
    sched.p = 480;
    sched.alpha = 1.0;
    CHECK(lambda_value(sched) == 0.0);
  }
  SUBCASE("pivotal schedule ignores sigma and R") {
    LambdaSchedule a;
    a.kind = ScheduleKind::SqrtLassoPivotal;
    a.n = 200;
    a.p = 300;
    a.sigma_x = 1.3;
    a.sigma = 0.1;
    a.R = 1.0;
    LambdaSchedule b = a;
    b.sigma = 5.0;
    b.R = 17.0;
    CHECK(lambda_value(a) == lambda_value(b));  // bit-identical
  }
  SUBCASE("missing inputs are named") {
    LambdaSchedule sched;
    sched.kind = ScheduleKind::Ar1;
    sched.n = 100;
    sched.p = 100;
    sched.alpha = 0.5;
    CHECK_THROWS_AS(lambda_value(sched), Error);
    try {
      lambda_value(sched);
    } catch (const Error& e) {
      CHECK(e.kind() == Err::MissingInput);
      CHECK(std::string(e.what()).find("R") != std::string::npos);
    }
  }
  SUBCASE("scale multiplies every kind") {
    LambdaSchedule sched;
    sched.kind = ScheduleKind::Manual;
    sched.value = 0.25;
    sched.scale = 3.0;
    CHECK(lambda_value(sched) == 0.75);
  }
  SUBCASE("formula spot checks") {
    LambdaSchedule sched;
    sched.n = 400;
    sched.p = 480;
    sched.alpha = 0.7;
    sched.sigma = 0.3;
    sched.sigma_x = 1.1;
    sched.R = 2.0;
    const double rate = std::sqrt(std::log(480.0) / 400.0);
    sched.kind = ScheduleKind::SubGaussianMcar;
    CHECK(lambda_value(sched) ==
          doctest::Approx((1.1 * 0.3 + 1.21 * std::sqrt(0.3) * 2.0) * rate));
    sched.kind = ScheduleKind::Mnar;
    CHECK(lambda_value(sched) == doctest::Approx((1.1 * 0.3 + 1.21 * 2.0) * rate));
    sched.kind = ScheduleKind::Ar1;
    CHECK(lambda_value(sched) == doctest::Approx(2.0 * rate / std::pow(0.7, 4)));
    sched.kind = ScheduleKind::Ar1Theory;
    CHECK(lambda_value(sched) ==
          doctest::Approx((1.1 * 0.3 / 0.49 + 1.21 * 2.0 / std::pow(0.7, 4)) * rate));
    sched.kind = ScheduleKind::Graphical;
    CHECK(lambda_value(sched) == doctest::Approx(1.21 * std::sqrt(0.3) * rate));
  }
}

TEST_CASE("lasso zero solution when the penalty dominates") {
  const MatrixXd X = synth::gen_identity_gaussian(30, 10, RngSeed{1});
  const VectorXd y = synth::gen_response(X, VectorXd::Ones(10), 0.5, RngSeed{2});
  const double lam_max = (X.transpose() * y / 30.0).lpNorm<Eigen::Infinity>();
  const FitResult fit = fit_lasso(make_problem(X, y, lam_max * 1.0000001));
  CHECK(fit.beta.cwiseAbs().sum() == 0.0);
  CHECK(fit.converged);
  CHECK(fit.kkt_residual <= 1e-8);
}

TEST_CASE("lasso soft-threshold closed form on an orthonormal-scaled design") {
  // X^T X / n = I
  const int n = 4;
  const MatrixXd noise = synth::gen_identity_gaussian(n, n, RngSeed{3});
  const Eigen::HouseholderQR<MatrixXd> qr(noise);
  const MatrixXd Q = qr.householderQ();
  const MatrixXd X = std::sqrt(static_cast<double>(n)) * Q;
  REQUIRE(((X.transpose() * X / n) - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <
          1e-12);
  VectorXd y(n);
  y << 1.0, -2.0, 0.05, 0.7;
  const double lambda = 0.3;
  const FitResult fit = fit_lasso(make_problem(X, y, lambda));
  const VectorXd z = X.transpose() * y / n;
  for (int j = 0; j < n; ++j)
    CHECK(fit.beta(j) == doctest::Approx(soft_threshold(z(j), lambda)).epsilon(1e-9));
}

TEST_CASE("lasso matches the proximal-gradient oracle") {
  Rng rng(99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 20, p = 8;
    const MatrixXd X = synth::gen_identity_gaussian(n, p, RngSeed{10 + static_cast<std::uint64_t>(rep)});
    VectorXd beta_true = VectorXd::Zero(p);
    beta_true(0) = 1.0;
    beta_true(3) = -0.5;
    const VectorXd y = synth::gen_response(X, beta_true, 0.3, RngSeed{40 + static_cast<std::uint64_t>(rep)});
    const double lambda = 0.1;
    const FitResult cd = fit_lasso(make_problem(X, y, lambda));
    const FitResult ista = oracles::prox_grad_lasso(make_problem(X, y, lambda), 100000);
    CHECK(std::abs(cd.objective - ista.objective) < 1e-8);
    CHECK(cd.kkt_residual <= 1e-8);
    if (unif(rng) < 2.0)  // solution unique for generic Gaussian designs
      CHECK((cd.beta - ista.beta).lpNorm<Eigen::Infinity>() < 1e-5);
  }
}

TEST_CASE("lasso objective is nonincreasing across sweeps") {
  const MatrixXd X = synth::gen_identity_gaussian(40, 25, RngSeed{17});
  VectorXd beta_true = VectorXd::Zero(25);
  beta_true.head(5).setOnes();
  const VectorXd y = synth::gen_response(X, beta_true, 0.5, RngSeed{18});
  double prev = std::numeric_limits<double>::infinity();
  for (int sweeps = 1; sweeps <= 25; ++sweeps) {
    RegressionProblem problem = make_problem(X, y, 0.05);
    problem.max_iter = sweeps;  // deterministic prefix of the same trajectory
    const FitResult fit = fit_lasso(problem);
    CHECK(fit.objective <= prev + 1e-12);
    prev = fit.objective;
  }
}

TEST_CASE("max_iter returns the best iterate unconverged") {
  const MatrixXd X = synth::gen_identity_gaussian(50, 30, RngSeed{19});
  const VectorXd y = synth::gen_response(X, VectorXd::Ones(30), 1.0, RngSeed{20});
  RegressionProblem problem = make_problem(X, y, 0.01);
  problem.max_iter = 1;
  const FitResult fit = fit_lasso(problem);
  CHECK(!fit.converged);
  CHECK(fit.iters == 1);
  CHECK(fit.beta.size() == 30);
}

TEST_CASE("basic inequality: the minimizer beats the truth") {
  for (std::uint64_t seed : {30ULL, 31ULL, 32ULL}) {
    const int n = 60, p = 80;
    const MatrixXd X = synth::gen_identity_gaussian(n, p, RngSeed{seed});
    const auto [beta0, s] = synth::gen_beta0_sqrt_sparsity(p);
    const VectorXd y = synth::gen_response(X, beta0, 0.2, RngSeed{seed + 100});
    const MaskedMatrix Z = synth::apply_mcar(X, 0.8, RngSeed{seed + 200});
    const MatrixXd Xhat = impute::zero_impute(Z).data;
    const double lambda = 0.2;
    const FitResult fit = fit_lasso(make_problem(Xhat, y, lambda));
    CHECK(lasso_objective(Xhat, y, fit.beta, lambda) <=
          lasso_objective(Xhat, y, beta0, lambda) + 1e-12);
  }
}

TEST_CASE("cone membership under a dominating penalty") {
  const int n = 200, p = 60;
  const MatrixXd X = synth::gen_identity_gaussian(n, p, RngSeed{41});
  const auto [beta0, s] = synth::gen_beta0_sqrt_sparsity(p);
  const VectorXd eps = 0.1 * synth::gen_identity_gaussian(n, 1, RngSeed{42});
  const VectorXd y = X * beta0 + eps;
  const MaskedMatrix Z = synth::apply_mcar(X, 0.8, RngSeed{43});
  const MatrixXd Xhat = impute::zero_impute(Z).data;

  const double term1 =
      (Xhat.transpose() * (Xhat - X) * beta0 / n).lpNorm<Eigen::Infinity>();
  const double term2 = (Xhat.transpose() * eps / n).lpNorm<Eigen::Infinity>();
  const double lambda = 4.0 * std::max(term1, term2);

  const FitResult fit = fit_lasso(make_problem(Xhat, y, lambda));
  const VectorXd w = fit.beta - beta0;
  double on_support = 0.0, off_support = 0.0;
  for (int j = 0; j < p; ++j)
    (j < s ? on_support : off_support) += std::abs(w(j));
  CHECK(off_support <= 3.0 * on_support + 1e-8);
}

TEST_CASE("restricted eigenvalue of the imputed design stays positive") {
  const int p = 64, s = 4;
  const double alpha = 0.8;
  const int n = static_cast<int>(8.0 * s * std::log(static_cast<double>(p))) + 1;
  const MatrixXd X = synth::gen_identity_gaussian(n, p, RngSeed{51});
  const MaskedMatrix Z = synth::apply_mcar(X, alpha, RngSeed{52});
  const MatrixXd Xhat = impute::zero_impute(Z).data;

  Rng rng(53);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double min_quadratic = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 1000; ++rep) {
    // random vector in the cone ||w_{S^c}||_1 <= 3 ||w_S||_1, unit sphere
    VectorXd w = VectorXd::Zero(p);
    for (int j = 0; j < s; ++j) w(j) = normal(rng);
    const double budget = 3.0 * unif(rng) * w.head(s).lpNorm<1>();
    VectorXd tail(p - s);
    for (int j = 0; j < p - s; ++j) tail(j) = normal(rng);
    const double tail_l1 = tail.lpNorm<1>();
    if (tail_l1 > 0) w.tail(p - s) = tail * (budget / tail_l1);
    w /= w.norm();
    min_quadratic = std::min(min_quadratic, (Xhat * w).squaredNorm() / n);
  }
  CHECK(min_quadratic > alpha / 4.0);
}

TEST_CASE("sqrt lasso zero solution under a large penalty") {
  const MatrixXd X = synth::gen_identity_gaussian(30, 10, RngSeed{61});
  const VectorXd y = synth::gen_response(X, VectorXd::Ones(10), 0.5, RngSeed{62});
  RegressionProblem problem = make_problem(X, y, 50.0);
  problem.solver = SolverKind::SqrtLasso;
  const FitResult fit = fit_sqrt_lasso(problem);
  CHECK(fit.beta.cwiseAbs().sum() == 0.0);
  CHECK(fit.objective == doctest::Approx(y.norm() / std::sqrt(30.0)).epsilon(1e-12));
}

TEST_CASE("sqrt lasso interpolates noiseless overdetermined data") {
  const MatrixXd X = synth::gen_identity_gaussian(30, 10, RngSeed{63});
  VectorXd beta_true(10);
  beta_true << 1, 0, -2, 0, 0, 0.5, 0, 0, 0, 0;
  const VectorXd y = X * beta_true;
  SUBCASE("lambda=0 recovers least squares") {
    RegressionProblem problem = make_problem(X, y, 0.0);
    problem.solver = SolverKind::SqrtLasso;
    const FitResult fit = fit_sqrt_lasso(problem);
    CHECK((fit.beta - beta_true).lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK((y - X * fit.beta).norm() < 1e-6);
  }
  SUBCASE("a positive penalty collapses the scale to interpolation") {
    RegressionProblem problem = make_problem(X, y, 0.05);
    problem.solver = SolverKind::SqrtLasso;
    const FitResult fit = fit_sqrt_lasso(problem);
    CHECK((y - X * fit.beta).norm() / std::sqrt(30.0) < 1e-6);
    CHECK((fit.beta - beta_true).lpNorm<Eigen::Infinity>() < 1e-4);
  }
  SUBCASE("an exactly zero residual is flagged degenerate") {
    RegressionProblem problem = make_problem(X, VectorXd::Zero(30), 0.05);
    problem.solver = SolverKind::SqrtLasso;
    const FitResult fit = fit_sqrt_lasso(problem);
    CHECK(fit.zero_residual_degenerate);
    CHECK(fit.converged);
    CHECK(fit.beta.cwiseAbs().sum() == 0.0);
  }
}

TEST_CASE("sqrt lasso matches a grid search over the scale fixed point") {
  const int n = 30, p = 10;
  const MatrixXd X = synth::gen_identity_gaussian(n, p, RngSeed{64});
  VectorXd beta_true = VectorXd::Zero(p);
  beta_true(1) = 1.0;
  beta_true(7) = -1.5;
  const VectorXd y = synth::gen_response(X, beta_true, 0.4, RngSeed{65});
  const double lambda = 0.2;

  RegressionProblem problem = make_problem(X, y, lambda);
  problem.solver = SolverKind::SqrtLasso;
  const FitResult fit = fit_sqrt_lasso(problem);
  CHECK(fit.converged);

  // oracle: dense grid over sigma_hat, each cell solved by a converged
  // inner lasso at penalty lambda * sigma_hat
  const double hi = y.norm() / std::sqrt(static_cast<double>(n));
  double best = std::numeric_limits<double>::infinity();
  VectorXd warm = VectorXd::Zero(p);
  for (int k = 10000; k >= 1; --k) {
    const double sigma_hat = hi * k / 10000.0;
    RegressionProblem sub = make_problem(X, y, lambda * sigma_hat);
    const FitResult inner = fit_lasso_warm(sub, warm, nullptr);
    warm = inner.beta;
    best = std::min(best, sqrt_lasso_objective(X, y, inner.beta, lambda));
  }
  CHECK(fit.objective <= best + 1e-6);
  CHECK(fit.objective >= best - 1e-6);
}

TEST_CASE("sqrt lasso optimality condition at convergence") {
  for (std::uint64_t seed : {70ULL, 71ULL, 72ULL}) {
    const int n = 40, p = 15;
    const MatrixXd X = synth::gen_identity_gaussian(n, p, RngSeed{seed});
    VectorXd beta_true = VectorXd::Zero(p);
    beta_true.head(3).setOnes();
    const VectorXd y = synth::gen_response(X, beta_true, 0.5, RngSeed{seed + 10});
    RegressionProblem problem = make_problem(X, y, 0.15);
    problem.solver = SolverKind::SqrtLasso;
    const FitResult fit = fit_sqrt_lasso(problem);
    REQUIRE(fit.converged);
    REQUIRE(!fit.zero_residual_degenerate);
    const VectorXd r = y - X * fit.beta;
    const double sigma_hat = r.norm() / std::sqrt(static_cast<double>(n));
    const double grad_inf = (X.transpose() * r / n).lpNorm<Eigen::Infinity>();
    CHECK(grad_inf <= 0.15 * sigma_hat + 1e-6);
  }
}

TEST_CASE("column standardization maps back to original coordinates") {
  const int n = 60, p = 8;
  MatrixXd X = synth::gen_identity_gaussian(n, p, RngSeed{91});
  VectorXd scales(p);
  scales << 1.0, 10.0, 0.1, 5.0, 1.0, 2.0, 0.5, 4.0;
  X = X * scales.asDiagonal();
  VectorXd beta_true = VectorXd::Zero(p);
  beta_true(1) = 0.2;
  beta_true(3) = -0.4;
  const VectorXd y = synth::gen_response(X, beta_true, 0.1, RngSeed{92});

  RegressionProblem problem = make_problem(X, y, 0.05);
  problem.standardize = true;
  const FitResult fit = fit_lasso(problem);

  // reference: standardize by hand (no centering, the intercept is off),
  // solve, undo the scaling
  VectorXd sd(p);
  for (int j = 0; j < p; ++j) sd(j) = std::sqrt(X.col(j).squaredNorm() / n);
  const FitResult manual =
      fit_lasso(make_problem(X * sd.cwiseInverse().asDiagonal(), y, 0.05));
  for (int j = 0; j < p; ++j)
    CHECK(fit.beta(j) == doctest::Approx(manual.beta(j) / sd(j)).epsilon(1e-10));
}

TEST_CASE("intercept recovers a shifted model") {
  const int n = 200, p = 6;
  MatrixXd X = synth::gen_identity_gaussian(n, p, RngSeed{93});
  X.array() += 2.0;  // nonzero column means
  VectorXd beta_true = VectorXd::Zero(p);
  beta_true(0) = 1.0;
  beta_true(4) = -0.5;
  const VectorXd y =
      (X * beta_true).array() + 3.0 +
      0.05 * synth::gen_identity_gaussian(n, 1, RngSeed{94}).array();

  RegressionProblem problem = make_problem(X, y, 0.01);
  problem.fit_intercept = true;
  const FitResult fit = fit_lasso(problem);
  CHECK(fit.intercept == doctest::Approx(3.0).epsilon(0.1));
  CHECK((fit.beta - beta_true).lpNorm<Eigen::Infinity>() < 0.1);

  // default problems keep the interceptless objective
  const FitResult plain = fit_lasso(make_problem(X, y, 0.01));
  CHECK(plain.intercept == 0.0);
}

TEST_CASE("kkt certificate holds on every converged fit") {
  Rng rng(881);
  std::uniform_real_distribution<double> lam_dist(1e-3, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 25, p = 12;
    const MatrixXd X = synth::gen_identity_gaussian(n, p, RngSeed{500 + static_cast<std::uint64_t>(rep)});
    const VectorXd y =
        synth::gen_response(X, VectorXd::Ones(p), 1.0, RngSeed{600 + static_cast<std::uint64_t>(rep)});
    const double lambda = lam_dist(rng);
    const FitResult fit = fit_lasso(make_problem(X, y, lambda));
    REQUIRE(fit.converged);
    CHECK(fit.kkt_residual <= 1e-8);
    CHECK(lasso_kkt_residual(X, y, fit.beta, lambda) <= 1e-8);
  }
}
