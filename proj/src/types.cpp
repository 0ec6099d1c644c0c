#include "mdlasso/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mdlasso {

const char* err_name(Err e) {
  switch (e) {
    case Err::DimensionMismatch: return "DimensionMismatch";
    case Err::NonFiniteObservedEntry: return "NonFiniteObservedEntry";
    case Err::InvalidDimension: return "InvalidDimension";
    case Err::PhiOutOfRange: return "PhiOutOfRange";
    case Err::AlphaOutOfRange: return "AlphaOutOfRange";
    case Err::NotPositiveDefinite: return "NotPositiveDefinite";
    case Err::DegenerateDenominator: return "DegenerateDenominator";
    case Err::NodeObserved: return "NodeObserved";
    case Err::SingularBlanketSystem: return "SingularBlanketSystem";
    case Err::SingularSystem: return "SingularSystem";
    case Err::MissingInput: return "MissingInput";
    case Err::UnreadableInput: return "UnreadableInput";
    case Err::MethodRequirementsMissing: return "MethodRequirementsMissing";
    case Err::IoError: return "IoError";
    case Err::UsageError: return "UsageError";
  }
  return "Unknown";
}

ErrClass err_class(Err e) {
  switch (e) {
    case Err::UsageError:
    case Err::MissingInput:
    case Err::MethodRequirementsMissing:
      return ErrClass::Usage;
    case Err::DimensionMismatch:
    case Err::NonFiniteObservedEntry:
    case Err::InvalidDimension:
    case Err::UnreadableInput:
    case Err::IoError:
      return ErrClass::Data;
    default:
      return ErrClass::Numeric;
  }
}

MaskedMatrix::MaskedMatrix(MatrixXd values, MaskXX mask)
    : values_(std::move(values)), mask_(std::move(mask)) {
  if (values_.rows() != mask_.rows() || values_.cols() != mask_.cols())
    throw Error(Err::DimensionMismatch,
                "values " + std::to_string(values_.rows()) + "x" +
                    std::to_string(values_.cols()) + " vs mask " +
                    std::to_string(mask_.rows()) + "x" +
                    std::to_string(mask_.cols()));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index i = 0; i < values_.rows(); ++i)
    for (Eigen::Index a = 0; a < values_.cols(); ++a)
      if (!mask_(i, a)) values_(i, a) = nan;
}

MaskRow MaskedMatrix::mask_row(Eigen::Index i) const {
  MaskRow row(static_cast<std::size_t>(cols()));
  for (Eigen::Index a = 0; a < cols(); ++a) row[static_cast<std::size_t>(a)] = mask_(i, a);
  return row;
}

double MaskedMatrix::observed_fraction() const {
  if (rows() == 0 || cols() == 0) return 0.0;
  long count = 0;
  for (Eigen::Index i = 0; i < rows(); ++i)
    for (Eigen::Index a = 0; a < cols(); ++a)
      if (mask_(i, a)) ++count;
  return static_cast<double>(count) / static_cast<double>(rows() * cols());
}

void validate(const MaskedMatrix& masked) {
  for (Eigen::Index i = 0; i < masked.rows(); ++i)
    for (Eigen::Index a = 0; a < masked.cols(); ++a)
      if (masked.observed(i, a) && !std::isfinite(masked.raw_values()(i, a)))
        throw Error(Err::NonFiniteObservedEntry,
                    "entry (" + std::to_string(i) + "," + std::to_string(a) +
                        ") is observed but not finite");
}

const char* impute_source_name(ImputeSource s) {
  switch (s) {
    case ImputeSource::ZeroImpute: return "ZeroImpute";
    case ImputeSource::Ar1Exact: return "Ar1Exact";
    case ImputeSource::Ar1Estimated: return "Ar1Estimated";
    case ImputeSource::GraphicalExact: return "GraphicalExact";
    case ImputeSource::GraphicalEstimated: return "GraphicalEstimated";
  }
  return "Unknown";
}

void validate(const RegressionProblem& problem) {
  if (problem.design.rows() != problem.response.size())
    throw Error(Err::DimensionMismatch,
                "design has " + std::to_string(problem.design.rows()) +
                    " rows, response has " + std::to_string(problem.response.size()));
  if (problem.lambda < 0)
    throw Error(Err::UsageError, "lambda must be nonnegative");
  if (problem.tol <= 0)
    throw Error(Err::UsageError, "tol must be positive");
  if (problem.max_iter <= 0)
    throw Error(Err::UsageError, "max_iter must be positive");
  if (!problem.design.allFinite())
    throw Error(Err::NonFiniteObservedEntry, "design contains non-finite entries");
}

const char* covariance_kind_name(CovarianceKind k) {
  switch (k) {
    case CovarianceKind::Identity: return "identity";
    case CovarianceKind::Ar1: return "ar1";
    case CovarianceKind::BandedPrecision: return "banded";
  }
  return "unknown";
}

void validate(const ModelTruth& truth) {
  int nnz = 0;
  for (Eigen::Index j = 0; j < truth.beta0.size(); ++j)
    if (truth.beta0(j) != 0.0) ++nnz;
  if (nnz != truth.s)
    throw Error(Err::UsageError, "s does not match the support size of beta0");
  if (std::abs(truth.R - truth.beta0.norm()) > 1e-12)
    throw Error(Err::UsageError, "R does not match ||beta0||_2");
  if (!(truth.alpha > 0.0 && truth.alpha <= 1.0))
    throw Error(Err::AlphaOutOfRange, "alpha must lie in (0, 1]");
}

SparsityGraph SparsityGraph::from_edges(
    int p, const std::vector<std::pair<int, int>>& edges) {
  if (p < 1) throw Error(Err::InvalidDimension, "graph needs p >= 1");
  SparsityGraph g;
  g.p = p;
  g.adjacency.assign(static_cast<std::size_t>(p), {});
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= p || v >= p)
      throw Error(Err::UnreadableInput,
                  "edge (" + std::to_string(u) + "," + std::to_string(v) +
                      ") outside [0," + std::to_string(p) + ")");
    if (u == v)
      throw Error(Err::UnreadableInput, "self-loop at " + std::to_string(u));
    g.adjacency[static_cast<std::size_t>(u)].push_back(v);
    g.adjacency[static_cast<std::size_t>(v)].push_back(u);
  }
  g.d_max = 0;
  for (auto& nbrs : g.adjacency) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    g.d_max = std::max(g.d_max, static_cast<int>(nbrs.size()));
  }
  return g;
}

SparsityGraph SparsityGraph::banded(int p, int bandwidth) {
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p && b - a <= bandwidth; ++b)
      edges.emplace_back(a, b);
  return from_edges(p, edges);
}

bool SparsityGraph::has_edge(int u, int v) const {
  const auto& nbrs = adjacency[static_cast<std::size_t>(u)];
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

}  // namespace mdlasso
