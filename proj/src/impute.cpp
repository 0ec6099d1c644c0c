#include "mdlasso/impute.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <exception>
#include <unordered_map>

namespace mdlasso::impute {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw Error(Err::AlphaOutOfRange,
                "alpha must lie in (0, 1], got " + std::to_string(alpha));
}

void check_phi(double phi) {
  if (!(std::abs(phi) < 1.0))
    throw Error(Err::PhiOutOfRange,
                "|phi| must be < 1, got " + std::to_string(phi));
}

// Conditional mean of the stationary AR(1) coordinate k for one row, given
// the nearest observed neighbors.  All missing entries in the row are
// handled independently; gaps are measured over missing entries only.
void ar1_impute_row(const MaskedMatrix& Z, double phi, Eigen::Index i,
                    MatrixXd& out) {
  const Eigen::Index p = Z.cols();
  Eigen::Index left = -1;  // nearest observed index <= current position
  for (Eigen::Index k = 0; k < p; ++k) {
    if (Z.observed(i, k)) {
      left = k;
      out(i, k) = Z.at(i, k);
      continue;
    }
    Eigen::Index right = -1;
    for (Eigen::Index r = k + 1; r < p; ++r) {
      if (Z.observed(i, r)) {
        right = r;
        break;
      }
    }
    if (left < 0 && right < 0) {
      out(i, k) = 0.0;  // unconditional mean
    } else if (left < 0) {
      out(i, k) = std::pow(phi, static_cast<double>(right - k)) * Z.at(i, right);
    } else if (right < 0) {
      out(i, k) = std::pow(phi, static_cast<double>(k - left)) * Z.at(i, left);
    } else {
      const double d1 = static_cast<double>(k - left);
      const double d2 = static_cast<double>(right - k);
      const double denom = 1.0 - std::pow(phi, 2.0 * (d1 + d2));
      const double wl = std::pow(phi, d1) * (1.0 - std::pow(phi, 2.0 * d2)) / denom;
      const double wr = std::pow(phi, d2) * (1.0 - std::pow(phi, 2.0 * d1)) / denom;
      out(i, k) = wl * Z.at(i, left) + wr * Z.at(i, right);
    }
  }
}

struct PatternKey {
  MaskRow bits;
  bool operator==(const PatternKey& other) const { return bits == other.bits; }
};

struct PatternKeyHash {
  std::size_t operator()(const PatternKey& key) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (bool b : key.bits) {
      h ^= b ? 0x9eULL : 0x37ULL;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

// Imputation weights for one (pattern, node): blanket indices plus the
// solved coefficients Sigma_{S,S}^{-1} Sigma_{S,k}.
struct NodeWeights {
  int node = -1;
  std::vector<int> blanket;
  VectorXd weights;
};

struct PatternPlan {
  std::vector<NodeWeights> missing_nodes;
  std::vector<Eigen::Index> rows;
};

VectorXd solve_blanket_system(const MatrixXd& sigma, const std::vector<int>& S,
                              int node) {
  const int m = static_cast<int>(S.size());
  MatrixXd A(m, m);
  VectorXd b(m);
  for (int r = 0; r < m; ++r) {
    b(r) = sigma(S[static_cast<std::size_t>(r)], node);
    for (int c = 0; c < m; ++c)
      A(r, c) = sigma(S[static_cast<std::size_t>(r)], S[static_cast<std::size_t>(c)]);
  }
  Eigen::LLT<MatrixXd> llt(A);
  if (llt.info() == Eigen::Success) return llt.solve(b);
  // Sigma~ is unbiased but not guaranteed PSD at finite n; nudge once.
  const double ridge = 1e-10 * A.trace() / static_cast<double>(m);
  MatrixXd A_ridge = A + ridge * MatrixXd::Identity(m, m);
  Eigen::LLT<MatrixXd> llt2(A_ridge);
  if (llt2.info() == Eigen::Success) return llt2.solve(b);
  // An indefinite but invertible submatrix is still usable: the imputation
  // rule only needs Sigma_{S,S}^{-1}, so fall back to an LU solve before
  // giving up.
  Eigen::FullPivLU<MatrixXd> lu(A_ridge);
  if (lu.isInvertible()) return lu.solve(b);
  throw Error(Err::SingularBlanketSystem,
              "blanket system of size " + std::to_string(m) + " at node " +
                  std::to_string(node) + " is singular");
}

void fill_plan_weights(const SparsityGraph& graph, const MatrixXd& sigma,
                       const PatternKey& key, PatternPlan& plan) {
  for (int k = 0; k < graph.p; ++k) {
    if (key.bits[static_cast<std::size_t>(k)]) continue;
    NodeWeights nw;
    nw.node = k;
    BlanketResult blanket = markov_blanket(graph, key.bits, k);
    nw.blanket = std::move(blanket.blanket);
    if (!nw.blanket.empty())
      nw.weights = solve_blanket_system(sigma, nw.blanket, k);
    plan.missing_nodes.push_back(std::move(nw));
  }
}

std::vector<std::pair<PatternKey, PatternPlan>> build_pattern_plans(
    const MaskedMatrix& Z, const SparsityGraph& graph, const MatrixXd& sigma,
    bool parallel) {
  std::unordered_map<PatternKey, std::size_t, PatternKeyHash> index;
  std::vector<std::pair<PatternKey, PatternPlan>> plans;
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    PatternKey key{Z.mask_row(i)};
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, plans.size());
      plans.push_back({key, PatternPlan{}});
      plans.back().second.rows.push_back(i);
    } else {
      plans[it->second].second.rows.push_back(i);
    }
  }
  if (parallel) {
    const auto n_plans = static_cast<std::int64_t>(plans.size());
    std::vector<std::exception_ptr> failures(plans.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t pi = 0; pi < n_plans; ++pi) {
      try {
        fill_plan_weights(graph, sigma, plans[static_cast<std::size_t>(pi)].first,
                          plans[static_cast<std::size_t>(pi)].second);
      } catch (...) {
        failures[static_cast<std::size_t>(pi)] = std::current_exception();
      }
    }
    for (const auto& f : failures)
      if (f) std::rethrow_exception(f);
  } else {
    for (auto& [key, plan] : plans) fill_plan_weights(graph, sigma, key, plan);
  }
  return plans;
}

void apply_plan_to_row(const MaskedMatrix& Z, const PatternPlan& plan,
                       Eigen::Index i, MatrixXd& out) {
  for (Eigen::Index a = 0; a < Z.cols(); ++a)
    if (Z.observed(i, a)) out(i, a) = Z.at(i, a);
  for (const NodeWeights& nw : plan.missing_nodes) {
    double value = 0.0;  // empty blanket: unconditional mean
    for (std::size_t j = 0; j < nw.blanket.size(); ++j)
      value += nw.weights(static_cast<Eigen::Index>(j)) *
               Z.at(i, nw.blanket[j]);
    out(i, nw.node) = value;
  }
}

ImputedMatrix graphical_impute_impl(const MaskedMatrix& Z,
                                    const SparsityGraph& graph,
                                    const MatrixXd& sigma, ImputeSource source,
                                    bool parallel) {
  if (static_cast<int>(Z.cols()) != graph.p)
    throw Error(Err::DimensionMismatch,
                "graph has p=" + std::to_string(graph.p) + ", data has p=" +
                    std::to_string(Z.cols()));
  if (sigma.rows() != Z.cols() || sigma.cols() != Z.cols())
    throw Error(Err::DimensionMismatch, "covariance dimensions do not match data");

  auto plans = build_pattern_plans(Z, graph, sigma, parallel);

  ImputedMatrix out;
  out.data.resize(Z.rows(), Z.cols());
  out.source = source;

  if (parallel) {
    const auto n_plans = static_cast<std::int64_t>(plans.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t pi = 0; pi < n_plans; ++pi)
      for (Eigen::Index i : plans[static_cast<std::size_t>(pi)].second.rows)
        apply_plan_to_row(Z, plans[static_cast<std::size_t>(pi)].second, i, out.data);
  } else {
    for (auto& [key, plan] : plans)
      for (Eigen::Index i : plan.rows) apply_plan_to_row(Z, plan, i, out.data);
  }
  return out;
}

}  // namespace

ImputedMatrix zero_impute(const MaskedMatrix& Z) {
  ImputedMatrix out;
  out.data.resize(Z.rows(), Z.cols());
  out.source = ImputeSource::ZeroImpute;
  for (Eigen::Index i = 0; i < Z.rows(); ++i)
    for (Eigen::Index a = 0; a < Z.cols(); ++a)
      out.data(i, a) = Z.observed(i, a) ? Z.at(i, a) : 0.0;
  return out;
}

Ar1Params estimate_phi(const MaskedMatrix& Z, double alpha) {
  check_alpha(alpha);
  const Eigen::Index n = Z.rows();
  const Eigen::Index p = Z.cols();
  const double np = static_cast<double>(n) * static_cast<double>(p);
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a + 1 < p; ++a) {
      if (Z.observed(i, a)) {
        const double x = Z.at(i, a);
        den += x * x;
        if (Z.observed(i, a + 1)) num += x * Z.at(i, a + 1);
      }
    }
  }
  if (den == 0.0)
    throw Error(Err::DegenerateDenominator,
                "no observed entries in columns 1..p-1");
  const double phi_hat =
      (num / (alpha * alpha * np)) / (den / (alpha * np));
  const double limit = 1.0 - 1e-9;
  Ar1Params params;
  params.phi = std::clamp(phi_hat, -limit, limit);
  params.estimated = true;
  return params;
}

ImputedMatrix ar1_impute(const MaskedMatrix& Z, Ar1Params params) {
  check_phi(params.phi);
  ImputedMatrix out;
  out.data.resize(Z.rows(), Z.cols());
  out.source = params.estimated ? ImputeSource::Ar1Estimated : ImputeSource::Ar1Exact;
  const auto n = static_cast<std::int64_t>(Z.rows());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t i = 0; i < n; ++i)
    ar1_impute_row(Z, params.phi, static_cast<Eigen::Index>(i), out.data);
  return out;
}

ImputedMatrix ar1_impute_serial(const MaskedMatrix& Z, Ar1Params params) {
  check_phi(params.phi);
  ImputedMatrix out;
  out.data.resize(Z.rows(), Z.cols());
  out.source = params.estimated ? ImputeSource::Ar1Estimated : ImputeSource::Ar1Exact;
  for (Eigen::Index i = 0; i < Z.rows(); ++i) ar1_impute_row(Z, params.phi, i, out.data);
  return out;
}

CovarianceEstimate estimate_covariance_mcar(const MaskedMatrix& Z, double alpha) {
  check_alpha(alpha);
  const Eigen::Index n = Z.rows();
  const Eigen::Index p = Z.cols();
  MatrixXd X0(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index a = 0; a < p; ++a)
      X0(i, a) = Z.observed(i, a) ? Z.at(i, a) : 0.0;
  const double a2n = alpha * alpha * static_cast<double>(n);
  MatrixXd sigma = (X0.transpose() * X0) / a2n;
  const VectorXd colsq = X0.array().square().colwise().sum();
  sigma.diagonal() -= ((1.0 - alpha) / a2n) * colsq;
  sigma = ((sigma + sigma.transpose()) / 2.0).eval();
  return CovarianceEstimate{std::move(sigma), alpha};
}

BlanketResult markov_blanket(const SparsityGraph& graph, const MaskRow& mask_row,
                             int node) {
  if (static_cast<int>(mask_row.size()) != graph.p)
    throw Error(Err::DimensionMismatch, "mask length does not match graph");
  if (node < 0 || node >= graph.p)
    throw Error(Err::InvalidDimension, "node out of range");
  if (mask_row[static_cast<std::size_t>(node)])
    throw Error(Err::NodeObserved,
                "node " + std::to_string(node) + " is observed");

  BlanketResult out;
  out.node = node;
  std::vector<char> visited(static_cast<std::size_t>(graph.p), 0);
  visited[static_cast<std::size_t>(node)] = 1;
  std::deque<int> queue{node};
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : graph.adjacency[static_cast<std::size_t>(v)]) {
      if (visited[static_cast<std::size_t>(w)]) continue;
      visited[static_cast<std::size_t>(w)] = 1;
      if (mask_row[static_cast<std::size_t>(w)]) {
        out.blanket.push_back(w);  // open vertex: stop this branch
      } else {
        out.explored_missing.push_back(w);
        queue.push_back(w);
      }
    }
  }
  std::sort(out.blanket.begin(), out.blanket.end());
  std::sort(out.explored_missing.begin(), out.explored_missing.end());
  return out;
}

ImputedMatrix graphical_impute(const MaskedMatrix& Z, const SparsityGraph& graph,
                               const MatrixXd& sigma_exact) {
  return graphical_impute_impl(Z, graph, sigma_exact, ImputeSource::GraphicalExact,
                               /*parallel=*/true);
}

ImputedMatrix graphical_impute(const MaskedMatrix& Z, const SparsityGraph& graph,
                               const CovarianceEstimate& sigma_estimate) {
  return graphical_impute_impl(Z, graph, sigma_estimate.sigma_tilde,
                               ImputeSource::GraphicalEstimated,
                               /*parallel=*/true);
}

ImputedMatrix graphical_impute_serial(const MaskedMatrix& Z,
                                      const SparsityGraph& graph,
                                      const MatrixXd& sigma_exact) {
  return graphical_impute_impl(Z, graph, sigma_exact, ImputeSource::GraphicalExact,
                               /*parallel=*/false);
}

}  // namespace mdlasso::impute
