#include "mdlasso/synth.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <random>

namespace mdlasso::synth {

namespace {

void check_dims(int n, int p) {
  if (n < 1 || p < 1)
    throw Error(Err::InvalidDimension,
                "need n, p >= 1, got n=" + std::to_string(n) +
                    " p=" + std::to_string(p));
}

}  // namespace

MatrixXd gen_identity_gaussian(int n, int p, RngSeed seed) {
  check_dims(n, p);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd X(n, p);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < p; ++a) X(i, a) = normal(rng);
  return X;
}

MatrixXd gen_ar1(int n, int p, double phi, RngSeed seed) {
  check_dims(n, p);
  if (!(std::abs(phi) < 1.0))
    throw Error(Err::PhiOutOfRange, "|phi| must be < 1, got " + std::to_string(phi));
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double stationary_sd = 1.0 / std::sqrt(1.0 - phi * phi);
  MatrixXd X(n, p);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = stationary_sd * normal(rng);
    for (int a = 1; a < p; ++a) X(i, a) = phi * X(i, a - 1) + normal(rng);
  }
  return X;
}

BandedDesign gen_banded_precision(int n, int p, double phi, int bandwidth,
                                  RngSeed seed) {
  check_dims(n, p);
  if (bandwidth < 0)
    throw Error(Err::InvalidDimension, "bandwidth must be >= 0");
  MatrixXd omega = MatrixXd::Zero(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      if (std::abs(a - b) <= bandwidth)
        omega(a, b) = std::pow(phi, std::abs(a - b));
  Eigen::LLT<MatrixXd> llt(omega);
  if (llt.info() != Eigen::Success)
    throw Error(Err::NotPositiveDefinite,
                "banded precision with phi=" + std::to_string(phi) +
                    " bandwidth=" + std::to_string(bandwidth) +
                    " is not positive definite");
  MatrixXd sigma = llt.solve(MatrixXd::Identity(p, p));
  sigma = ((sigma + sigma.transpose()) / 2.0).eval();

  // rows X_i = L g with Sigma = L L^T
  Eigen::LLT<MatrixXd> llt_sigma(sigma);
  if (llt_sigma.info() != Eigen::Success)
    throw Error(Err::NotPositiveDefinite, "covariance factorization failed");
  MatrixXd L = llt_sigma.matrixL();

  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd X(n, p);
  VectorXd g(p);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < p; ++a) g(a) = normal(rng);
    X.row(i) = (L * g).transpose();
  }

  BandedDesign out;
  out.X = std::move(X);
  out.sigma = std::move(sigma);
  out.omega = std::move(omega);
  out.graph = SparsityGraph::banded(p, bandwidth);
  return out;
}

MaskedMatrix apply_mcar(const MatrixXd& full, double alpha, RngSeed seed) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw Error(Err::AlphaOutOfRange,
                "alpha must lie in (0, 1], got " + std::to_string(alpha));
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  MaskXX mask(full.rows(), full.cols());
  for (Eigen::Index i = 0; i < full.rows(); ++i)
    for (Eigen::Index a = 0; a < full.cols(); ++a)
      mask(i, a) = (alpha >= 1.0) || (unif(rng) < alpha);
  return MaskedMatrix(full, std::move(mask));
}

PatternDist pattern_point_mass(MaskRow pattern) {
  return [pattern = std::move(pattern)](Rng&) { return pattern; };
}

PatternDist pattern_bernoulli(int p, double alpha) {
  if (p < 1) throw Error(Err::InvalidDimension, "need p >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw Error(Err::AlphaOutOfRange, "alpha must lie in (0, 1]");
  return [p, alpha](Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    MaskRow row(static_cast<std::size_t>(p));
    for (int a = 0; a < p; ++a)
      row[static_cast<std::size_t>(a)] = (alpha >= 1.0) || (unif(rng) < alpha);
    return row;
  };
}

MaskedMatrix apply_mnar_rowpattern(const MatrixXd& full,
                                   const PatternDist& pattern_dist,
                                   RngSeed seed) {
  Rng rng = make_rng(seed);
  MaskXX mask(full.rows(), full.cols());
  for (Eigen::Index i = 0; i < full.rows(); ++i) {
    MaskRow row = pattern_dist(rng);
    if (static_cast<Eigen::Index>(row.size()) != full.cols())
      throw Error(Err::DimensionMismatch,
                  "pattern length " + std::to_string(row.size()) +
                      " does not match p=" + std::to_string(full.cols()));
    for (Eigen::Index a = 0; a < full.cols(); ++a)
      mask(i, a) = row[static_cast<std::size_t>(a)];
  }
  return MaskedMatrix(full, std::move(mask));
}

Beta0 gen_beta0_sqrt_sparsity(int p) {
  if (p < 1) throw Error(Err::InvalidDimension, "need p >= 1");
  const int s = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));
  Beta0 out;
  out.beta0 = VectorXd::Zero(p);
  out.beta0.head(s).setOnes();
  out.s = s;
  return out;
}

VectorXd gen_response(const MatrixXd& X, const VectorXd& beta0, double sigma,
                      RngSeed seed) {
  if (X.cols() != beta0.size())
    throw Error(Err::DimensionMismatch,
                "X has " + std::to_string(X.cols()) + " columns, beta0 has " +
                    std::to_string(beta0.size()));
  if (sigma < 0) throw Error(Err::UsageError, "sigma must be >= 0");
  VectorXd y = X * beta0;
  if (sigma > 0) {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += sigma * normal(rng);
  }
  return y;
}

}  // namespace mdlasso::synth
