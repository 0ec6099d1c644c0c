#ifndef MDLASSO_IMPUTE_HPP
#define MDLASSO_IMPUTE_HPP

#include <vector>

#include "mdlasso/types.hpp"

namespace mdlasso::impute {

struct Ar1Params {
  double phi = 0.0;
  bool estimated = false;
};

// Observed column indices that screen a missing node from the rest of the
// row, plus the missing vertices the search walked through.
struct BlanketResult {
  int node = -1;
  std::vector<int> blanket;
  std::vector<int> explored_missing;
};

struct CovarianceEstimate {
  MatrixXd sigma_tilde;
  double alpha_used = 1.0;
};

// Missing entries set to 0, observed entries copied verbatim.
ImputedMatrix zero_impute(const MaskedMatrix& Z);

// Ratio estimator for the AR(1) coefficient from the observed entries:
//
//   phi_hat = [ (1/(alpha^2 n p)) sum_i sum_{a=1}^{p-1} X_ia X_i(a+1) M_ia M_i(a+1) ]
//           / [ (1/(alpha   n p)) sum_i sum_{a=1}^{p-1} X_ia^2 M_ia ]
//
// The result is clamped to (-1 + 1e-9, 1 - 1e-9): the imputation formula
// diverges at |phi| = 1 and the estimator can exceed it at finite n.
Ar1Params estimate_phi(const MaskedMatrix& Z, double alpha);

// Conditional-mean imputation for the stationary AR(1) chain.  A missing
// entry with observed entries on both sides at gaps d1 (left) and d2 (right)
// gets
//
//   phi^{d1} (1 - phi^{2 d2}) / (1 - phi^{2(d1+d2)}) * X_L
// + phi^{d2} (1 - phi^{2 d1}) / (1 - phi^{2(d1+d2)}) * X_R
//
// which equals the textbook Gaussian conditional mean but avoids the
// phi^{-d} factors that overflow for long gaps.  One-sided boundaries use
// phi^d * X_nearest; a fully missing row imputes to 0.
ImputedMatrix ar1_impute(const MaskedMatrix& Z, Ar1Params params);
ImputedMatrix ar1_impute_serial(const MaskedMatrix& Z, Ar1Params params);

// Unbiased covariance estimator built from the zero-imputed design X0:
//
//   Sigma~ = (1/(alpha^2 n)) sum_i X0_i X0_i^T
//          - ((1-alpha)/(alpha^2 n)) sum_i diag(X0_i X0_i^T)
//
// symmetrized as (S + S^T)/2.
CovarianceEstimate estimate_covariance_mcar(const MaskedMatrix& Z, double alpha);

// First observed vertices reached by walks from `node` through missing
// vertices only.  Requires mask_row[node] == false.
BlanketResult markov_blanket(const SparsityGraph& graph, const MaskRow& mask_row,
                             int node);

// Conditional-mean imputation for a Gaussian row with known precision
// pattern: each missing (i,k) is imputed as
// Sigma_{k,S} (Sigma_{S,S})^{-1} X_{i,S} over its Markov blanket S.
// Blankets and solve weights depend only on (mask pattern, node), so rows
// sharing a pattern share them.
ImputedMatrix graphical_impute(const MaskedMatrix& Z, const SparsityGraph& graph,
                               const MatrixXd& sigma_exact);
ImputedMatrix graphical_impute(const MaskedMatrix& Z, const SparsityGraph& graph,
                               const CovarianceEstimate& sigma_estimate);
ImputedMatrix graphical_impute_serial(const MaskedMatrix& Z,
                                      const SparsityGraph& graph,
                                      const MatrixXd& sigma_exact);

}  // namespace mdlasso::impute

#endif
