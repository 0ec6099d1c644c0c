#ifndef MDLASSO_TYPES_HPP
#define MDLASSO_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mdlasso {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MaskXX = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using MaskRow = std::vector<bool>;

// Every failure the library can raise, tagged so the CLI can map it to an
// exit class and tests can match on the exact kind.
enum class Err {
  DimensionMismatch,
  NonFiniteObservedEntry,
  InvalidDimension,
  PhiOutOfRange,
  AlphaOutOfRange,
  NotPositiveDefinite,
  DegenerateDenominator,
  NodeObserved,
  SingularBlanketSystem,
  SingularSystem,
  MissingInput,
  UnreadableInput,
  MethodRequirementsMissing,
  IoError,
  UsageError,
};

enum class ErrClass { Usage = 2, Data = 3, Numeric = 4 };

const char* err_name(Err e);
ErrClass err_class(Err e);

class Error : public std::runtime_error {
 public:
  Error(Err kind, const std::string& what)
      : std::runtime_error(std::string("error[") + err_name(kind) + "] " + what),
        kind_(kind) {}
  Err kind() const { return kind_; }
  ErrClass err_class() const { return mdlasso::err_class(kind_); }

 private:
  Err kind_;
};

// Observed data Z with an explicit missingness mask (true = observed).
// Unobserved slots are poisoned with NaN at construction so that a stray
// read is detectable downstream instead of silently producing a number.
class MaskedMatrix {
 public:
  MaskedMatrix(MatrixXd values, MaskXX mask);

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }

  bool observed(Eigen::Index i, Eigen::Index a) const { return mask_(i, a); }

  // Fails on a missing entry rather than returning a number.
  double at(Eigen::Index i, Eigen::Index a) const {
    if (!mask_(i, a))
      throw Error(Err::NonFiniteObservedEntry,
                  "read of missing entry (" + std::to_string(i) + "," +
                      std::to_string(a) + ")");
    return values_(i, a);
  }

  const MatrixXd& raw_values() const { return values_; }
  const MaskXX& mask() const { return mask_; }
  MaskRow mask_row(Eigen::Index i) const;

  double observed_fraction() const;

 private:
  MatrixXd values_;
  MaskXX mask_;
};

void validate(const MaskedMatrix& masked);

enum class ImputeSource {
  ZeroImpute,
  Ar1Exact,
  Ar1Estimated,
  GraphicalExact,
  GraphicalEstimated,
};

const char* impute_source_name(ImputeSource s);

// Dense design produced by an imputer. Observed entries are copied from the
// source verbatim; every entry is finite.
struct ImputedMatrix {
  MatrixXd data;
  ImputeSource source = ImputeSource::ZeroImpute;
  bool observed_passthrough = true;
};

enum class SolverKind { Lasso, SqrtLasso };

struct RegressionProblem {
  MatrixXd design;  // imputed design matrix
  VectorXd response;
  double lambda = 0.0;
  SolverKind solver = SolverKind::Lasso;
  double tol = 1e-8;
  int max_iter = 100000;  // full coordinate sweeps
  // Generators produce zero-mean unit-scale designs, so both default off.
  bool fit_intercept = false;
  bool standardize = false;
};

void validate(const RegressionProblem& problem);

struct FitResult {
  VectorXd beta;
  double intercept = 0.0;  // nonzero only when the problem asked for one
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iters = 0;
  bool converged = false;
  // sqrt-LASSO only: the residual hit the interpolation floor, where the
  // objective is nonsmooth and the scale equation degenerates.
  bool zero_residual_degenerate = false;
};

enum class CovarianceKind { Identity, Ar1, BandedPrecision };

const char* covariance_kind_name(CovarianceKind k);

struct ModelTruth {
  VectorXd beta0;
  int s = 0;
  double R = 0.0;
  double sigma = 0.0;
  double sigma_x = 1.0;
  double alpha = 1.0;
  CovarianceKind covariance_kind = CovarianceKind::Identity;
  double phi = 0.0;    // Ar1 / BandedPrecision
  int bandwidth = 0;   // BandedPrecision
};

void validate(const ModelTruth& truth);

// Off-diagonal sparsity pattern of a precision matrix, stored as sorted
// adjacency lists. No self-loops, symmetric by construction.
struct SparsityGraph {
  int p = 0;
  std::vector<std::vector<int>> adjacency;
  int d_max = 0;

  static SparsityGraph from_edges(int p,
                                  const std::vector<std::pair<int, int>>& edges);
  static SparsityGraph banded(int p, int bandwidth);
  static SparsityGraph chain(int p) { return banded(p, 1); }

  bool has_edge(int u, int v) const;
};

}  // namespace mdlasso

#endif
