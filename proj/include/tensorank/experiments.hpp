#pragma once

#include "tensorank/param_select.hpp"

#include <optional>

namespace tensorank {

/// A random low-rank instance together with the factors that produced it.
struct GroundTruth {
    Tensor3 tensor;
    CpFactors factors;
};

/// Draws cn unit rank-one components (factor columns i.i.d. standard normal,
/// then normalized) with coefficients uniform on [0.5, 1.5], sums them, and
/// optionally adds i.i.d. Gaussian noise with the given standard deviation.
/// Same seed, same instance.
GroundTruth gen_random_lowrank(const std::array<Index, 3>& dims, Index cn,
                               std::uint64_t seed, double noise_sigma = 0.0);

struct SweepPoint {
    double lambda = 0;
    Index r_hat = 0;
};

/// Estimated rank as a function of the penalty: generates one instance from
/// `seed`, then runs the solver once per lambda value with that same seed for
/// the initialization.
std::vector<SweepPoint> sweep_lambda(const std::array<Index, 3>& dims, Index cn, Index R,
                                     const std::vector<double>& lambdas, std::uint64_t seed,
                                     SolverConfig cfg);

/// Builds the lambda grid {0, step, 2*step, ..., hi} inclusive of hi up to a
/// half-step of slack.
std::vector<double> lambda_grid(double hi, double step);

struct CellSpec {
    std::array<Index, 3> dims{};
    Index cn = 1;
};

struct TrialRow {
    std::array<Index, 3> dims{};
    Index cn = 0;
    Index trial = 0;
    Index r_hat = 0;
    double rel_residual = 0; ///< |A - model|_F / |A|_F at the final iterate
    Index iterations = 0;
    double ms = 0; ///< wall time of the trial (pilot + penalized solve)
};

struct CellStats {
    CellSpec cell;
    double mean_rank = 0;
    double std_rank = 0; ///< sample standard deviation (n - 1 denominator)
};

struct RankStudyReport {
    std::vector<TrialRow> rows;
    std::vector<CellStats> cells;
};

/// Rank-estimation study over a grid of (dims, cn) cells: every trial
/// generates a fresh instance with seed base_seed + trial index, selects
/// lambda from the data, and solves with R equal to the first extent.
/// Trials may run on `jobs` worker threads; the report is identical for any
/// job count because each trial is fully determined by its own seed.
RankStudyReport rank_study(const std::vector<CellSpec>& cells, Index trials,
                           std::uint64_t base_seed, const SolverConfig& base_cfg, int jobs = 1);

/// The cells of the accompanying rank study, largest first omits nothing:
/// cn in {2,3,4} at 5^3, {2,3,4,5,8} at 10^3, {2,3,4,5,8,10,15} at 20^3.
std::vector<CellSpec> default_rank_study_cells();

struct ComparisonResult {
    SolverTrace penalized_trace;   ///< the sparse solver, lambda = lambda_hat
    SolverTrace unpenalized_trace; ///< the lambda = 0 baseline (also the pilot)
    double lambda_hat = 0;
};

/// Head-to-head run on one seeded instance: the unpenalized baseline doubles
/// as the pilot for the penalty selection, then the sparse solver runs with
/// the selected lambda from the same seed. Both traces are recorded.
ComparisonResult compare_solvers(const std::array<Index, 3>& dims, Index cn, Index R,
                                 std::uint64_t seed, SolverConfig cfg);

struct ConsistencySpec {
    Index n = 200;          ///< observations
    Index R = 10;           ///< design columns
    Index k = 3;            ///< true support size
    double sigma2 = 1e-3;   ///< noise variance
    double gamma_target = 0.5;
    Index trials = 500;
    std::optional<double> lambda; ///< empty: chosen so the bound equals 0.99
    std::uint64_t seed = 0;
    Index design_attempts = 1000; ///< resampling budget for the gamma filter
};

struct ConsistencyTrialRow {
    Index trial = 0;
    bool recovered = false; ///< lasso support exactly equals the true support
};

struct ConsistencyResult {
    std::vector<ConsistencyTrialRow> rows;
    double rate = 0;   ///< fraction of trials with exact support recovery
    double bound = 0;  ///< theoretical lower bound on that probability
    double lambda = 0; ///< penalty actually used
    double gamma = 0;  ///< measured incoherence gap of the accepted design
    double mu = 0;     ///< smallest eigenvalue of the restricted Gram
    bool bound_vacuous = false; ///< bound <= 0 carries no information
};

/// Monte Carlo check of the support-recovery guarantee: samples unit-column
/// Gaussian designs until the measured incoherence gap reaches gamma_target,
/// plants a k-sparse signal with magnitudes 1.25x to 2.25x above the
/// recovery floor lambda*(1/(2 sqrt(mu)) + |(B_S^T B_S)^-1|_inf), then runs
/// independent noisy trials through the lasso solver. sigma2 = 0 requires an
/// explicit lambda. Throws std::runtime_error when no design passes the
/// filter within design_attempts.
ConsistencyResult consistency_experiment(const ConsistencySpec& spec);

} // namespace tensorank
