#ifndef MDLASSO_SYNTH_HPP
#define MDLASSO_SYNTH_HPP

#include <functional>

#include "mdlasso/rng.hpp"
#include "mdlasso/types.hpp"

namespace mdlasso::synth {

// n x p matrix of i.i.d. N(0,1) entries.
MatrixXd gen_identity_gaussian(int n, int p, RngSeed seed);

// Each row holds p consecutive points of the stationary AR(1) chain
// X_t = phi X_{t-1} + N(0,1), started from the stationary law
// X_0 ~ N(0, 1/(1-phi^2)); rows independent.  Population covariance is
// (Sigma)_{ab} = phi^{|a-b|} / (1 - phi^2).
MatrixXd gen_ar1(int n, int p, double phi, RngSeed seed);

struct BandedDesign {
  MatrixXd X;
  SparsityGraph graph;  // off-diagonal pattern of Omega
  MatrixXd sigma;       // Omega^{-1}
  MatrixXd omega;
};

// Omega_{ab} = phi^{|a-b|} * 1{|a-b| <= bandwidth}; rows drawn i.i.d.
// N(0, Omega^{-1}).  Raises NotPositiveDefinite when the Cholesky of Omega
// fails.
BandedDesign gen_banded_precision(int n, int p, double phi, int bandwidth,
                                  RngSeed seed);

// Each entry observed independently with probability alpha.
MaskedMatrix apply_mcar(const MatrixXd& full, double alpha, RngSeed seed);

// Samples one boolean observation pattern of length p.
using PatternDist = std::function<MaskRow(Rng&)>;

PatternDist pattern_point_mass(MaskRow pattern);
PatternDist pattern_bernoulli(int p, double alpha);

// Mask rows drawn i.i.d. from pattern_dist, independently of the values.
MaskedMatrix apply_mnar_rowpattern(const MatrixXd& full,
                                   const PatternDist& pattern_dist,
                                   RngSeed seed);

struct Beta0 {
  VectorXd beta0;
  int s = 0;
};

// First ceil(sqrt(p)) entries equal 1, the rest 0.
Beta0 gen_beta0_sqrt_sparsity(int p);

// y = X beta0 + sigma * g, g i.i.d. standard normal.
VectorXd gen_response(const MatrixXd& X, const VectorXd& beta0, double sigma,
                      RngSeed seed);

}  // namespace mdlasso::synth

#endif
