#pragma once

#include "tensorank/solver.hpp"

namespace tensorank {

/// Output of the data-driven penalty selection.
struct LambdaEstimate {
    double sigma2_hat = 0; ///< noise variance proxy from the pilot residual
    double gamma_hat = 0;  ///< incoherence gap of the pilot components
    double lambda_hat = 0; ///< selected l1 weight
    SolveResult pilot;     ///< the unpenalized pilot solve the estimates came from
};

/// Diagnostics of the support-recovery guarantee for a lasso instance.
struct ConsistencyDiagnostics {
    bool incoherence_ok = false; ///< off-support columns are strictly dominated
    double gamma = 0;            ///< achieved incoherence gap, may be <= 0
    double mu = 0;               ///< smallest eigenvalue of the restricted Gram
    double inv_inf_norm = 0;     ///< infinity norm of the restricted Gram inverse
    double bound = 0;            ///< 1 - 2R exp(-lambda^2 gamma^2 / (8 sigma^2))
};

/// The closed-form penalty rule (2/gamma) * sqrt(2 sigma^2 log(200 R)).
/// Plugging the result back into the recovery bound with the same gamma and
/// sigma^2 gives exactly 0.99 for every R. Requires gamma in (0, 1], R >= 1,
/// sigma2 >= 0.
double lambda_from_estimates(double sigma2, double gamma, Index R);

/// Incoherence gap of a set of CP components: 1 minus the largest absolute
/// inner product between distinct vectorized unit rank-one components.
/// Throws std::invalid_argument for R = 1 ("need R >= 2") and
/// std::runtime_error when the gap is not positive ("pilot factors coherent").
double incoherence_gap(const CpFactors& f);

/// Data-driven lambda: runs the unpenalized solver as a pilot with the given
/// configuration (its lambda field is ignored), takes sigma2_hat as the
/// population variance of the entries of A minus the pilot reconstruction,
/// gamma_hat as the pilot components' incoherence gap, and applies
/// lambda_from_estimates.
LambdaEstimate estimate_lambda(const Tensor3& A, Index R, const SolverConfig& cfg);

/// Evaluates the support-recovery guarantee for the design B (unit-norm
/// columns), true support S (ascending index list), penalty lambda and noise
/// variance sigma2. Throws std::runtime_error("restricted design
/// rank-deficient") when the Gram of the S-columns is singular. S must be a
/// nonempty proper subset of the column indices.
ConsistencyDiagnostics consistency_bound(const Matrix& B, const std::vector<Index>& S,
                                         double lambda, double sigma2);

} // namespace tensorank
