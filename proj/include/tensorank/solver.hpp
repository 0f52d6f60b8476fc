#pragma once

#include "tensorank/cp_model.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace tensorank {

/// Configuration shared by the LRAT solver and its lambda = 0 reduction.
///
/// The step-size control parameter s must be strictly greater than 1: each
/// block uses the step 1/(s*c) where c is the Frobenius norm of the block's
/// normal matrix (a Lipschitz bound for that block's gradient), and s > 1 is
/// what makes the per-iteration descent margin strictly positive.
struct SolverConfig {
    Index R = 1;              ///< number of components in the working model
    double lambda = 0.0;      ///< l1 weight on alpha (>= 0)
    double s = 1.5;           ///< step control, > 1
    Index iter_max = 10000;   ///< outer iteration cap (>= 1)
    double conv_tol = 1e-10;  ///< stop when the objective decrease per
                              ///< iteration falls below conv_tol * max(1, initial objective)
    std::uint64_t seed = 0;   ///< RNG seed for the random initialization
    bool record_trace = false;
};

/// Per-iteration scalars used by the block steps of one outer iteration.
/// d_n, e_n, f_n scale the X, Y, Z gradient steps; eta_n scales the alpha
/// step and sets the soft-threshold level lambda/(s*eta_n). All four are
/// clamped below at 1.
struct StepDiagnostics {
    double d_n = 0, e_n = 0, f_n = 0, eta_n = 0;
    double step_gap = 0; ///< Frobenius distance between consecutive iterates,
                         ///< all four blocks stacked
};

/// One trace row per completed outer iteration, plus an initial row at
/// iter 0 describing the starting point (its step fields are zero).
struct TraceRecord {
    Index iter = 0;
    double objective = 0;     ///< total penalized objective after the iteration
    double residual_half = 0; ///< smooth part only
    double step_gap = 0;
    double d_n = 0, e_n = 0, f_n = 0, eta_n = 0;
    Index nnz = 0; ///< exact nonzeros in alpha
};

using SolverTrace = std::vector<TraceRecord>;

struct SolveResult {
    CpFactors factors;
    Index estimated_rank = 0; ///< count_nonzero(alpha, 0)
    Index iterations = 0;     ///< outer iterations actually performed
    bool converged = false;   ///< objective-decrease test met before iter_max
    double kkt_residual = 0;  ///< stationarity residual at the final iterate
    std::optional<SolverTrace> trace;
};

/// Elementwise shrinkage: component i maps to sign(v_i) * max(|v_i| - tau, 0).
/// tau = 0 returns v unchanged, so the lambda = 0 solver path is a plain
/// gradient step.
Vector soft_threshold(const Vector& v, double tau);

struct StepResult {
    CpFactors factors;
    StepDiagnostics diag;
};

/// One outer iteration of the proximal alternating scheme, blocks in the
/// order X, Y, Z, alpha. Each factor block takes a scaled gradient descent
/// step followed by column renormalization; the alpha block takes a scaled
/// gradient step followed by soft thresholding. See lrat_solve for the
/// enclosing loop. Requires f normalized (columns at unit norm within 1e-10)
/// and dims matching A; throws std::invalid_argument otherwise, and
/// std::runtime_error if a descent direction column collapses to zero length
/// (below 1e-300), which makes the renormalization undefined.
StepResult lrat_step(const Tensor3& A, const CpFactors& f, const SolverConfig& cfg);

/// Full solver for
///   min 1/2 |A - model(alpha, X, Y, Z)|_F^2 + lambda * |alpha|_1
/// over unit-column factors. Starts from seeded random normalized factors;
/// alpha starts at the ridge-regularized least-squares fit of the data onto
/// the initial components (ridge 1e-12, falling back to zero if that solve
/// goes non-finite). Iterates lrat_step until the per-iteration objective
/// decrease drops below conv_tol * max(1, initial objective) or iter_max is
/// reached. The objective never increases along the way; if it ever turns
/// non-finite the solver throws std::runtime_error("divergence").
SolveResult lrat_solve(const Tensor3& A, const SolverConfig& cfg);

/// The lambda = 0 reduction: identical code path with the penalty switched
/// off, so the alpha block becomes a pure scaled gradient step. Traces and
/// iterates agree bit for bit with lrat_solve at lambda = 0.
SolveResult modals_solve(const Tensor3& A, const SolverConfig& cfg);

/// Stationarity residual of the penalized problem at f: for each factor
/// column, the norm of the gradient component orthogonal to that column
/// (the multiplier of the norm constraint is recovered by projection); for
/// each alpha coordinate, the distance from -grad_alpha to the l1
/// subdifferential scaled by lambda. Returns the max over all blocks; zero
/// exactly at constrained stationary points.
double kkt_residual(const Tensor3& A, const CpFactors& f, double lambda);

/// Plain lasso instance min 1/2 |b - B theta|^2 + lambda |theta|_1 with
/// unit-norm design columns (checked to 1e-10 by the solver).
struct LassoProblem {
    Matrix B;
    Vector b;
    double lambda = 0.0;
};

struct LassoSolution {
    Vector theta;
    std::vector<Index> support; ///< indices with theta[i] != 0, ascending
};

/// Proximal gradient (ISTA) with the same step policy as the alpha block:
/// step 1/(s * max(|B^T B|_F, 1)) with s = 1.5, threshold lambda * step.
/// Stops when the subgradient stationarity residual falls below conv_tol
/// coordinate-wise, or after iter_max sweeps.
LassoSolution lasso_solve_ista(const LassoProblem& p, Index iter_max = 100000,
                               double conv_tol = 1e-6);

} // namespace tensorank
