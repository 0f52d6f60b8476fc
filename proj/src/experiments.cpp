#include "tensorank/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

namespace tensorank {

namespace {

// Runs fn(0..count-1), either inline or on a small worker pool. Work items
// are independent and write to disjoint slots, so the only shared state is
// the index counter. The first exception wins and is rethrown on the caller.
void parallel_trials(Index count, int jobs, const std::function<void(Index)>& fn) {
    if (jobs <= 1 || count <= 1) {
        for (Index i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<Index> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const Index i = next.fetch_add(1);
            if (i >= count)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(jobs, int(count));
    pool.reserve(n);
    for (int t = 0; t < n; ++t)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2)
        return 0.0;
    double acc = 0.0;
    for (double x : v)
        acc += (x - mean) * (x - mean);
    return std::sqrt(acc / double(v.size() - 1));
}

} // namespace

GroundTruth gen_random_lowrank(const std::array<Index, 3>& dims, Index cn,
                               std::uint64_t seed, double noise_sigma) {
    if (cn < 1)
        throw std::invalid_argument("gen_random_lowrank: cn must be >= 1");
    if (!(noise_sigma >= 0.0))
        throw std::invalid_argument("gen_random_lowrank: noise_sigma must be >= 0");
    if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
        throw std::invalid_argument("gen_random_lowrank: extents must be positive");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> coeff(0.5, 1.5);

    auto draw = [&](Index rows) {
        Matrix m(rows, cn);
        for (Index c = 0; c < cn; ++c) {
            double n = 0.0;
            do {
                for (Index i = 0; i < rows; ++i)
                    m(i, c) = gauss(rng);
                n = m.col(c).norm();
            } while (n < 1e-300);
            m.col(c) /= n;
        }
        return m;
    };

    CpFactors truth;
    truth.X = draw(dims[0]);
    truth.Y = draw(dims[1]);
    truth.Z = draw(dims[2]);
    truth.alpha.resize(cn);
    for (Index r = 0; r < cn; ++r)
        truth.alpha[r] = coeff(rng);

    Tensor3 tensor = reconstruct(truth);
    if (noise_sigma > 0.0) {
        for (Index i = 0; i < tensor.size(); ++i)
            tensor.data()[i] += noise_sigma * gauss(rng);
    }
    return {std::move(tensor), std::move(truth)};
}

std::vector<double> lambda_grid(double hi, double step) {
    if (!(hi >= 0.0) || !(step > 0.0))
        throw std::invalid_argument("lambda_grid: need hi >= 0 and step > 0");
    const Index count = Index(std::llround(hi / step));
    std::vector<double> grid;
    grid.reserve(count + 1);
    for (Index i = 0; i <= count; ++i)
        grid.push_back(double(i) * step);
    return grid;
}

std::vector<SweepPoint> sweep_lambda(const std::array<Index, 3>& dims, Index cn, Index R,
                                     const std::vector<double>& lambdas, std::uint64_t seed,
                                     SolverConfig cfg) {
    const GroundTruth instance = gen_random_lowrank(dims, cn, seed);
    cfg.R = R;
    cfg.seed = seed;
    std::vector<SweepPoint> out;
    out.reserve(lambdas.size());
    for (double lambda : lambdas) {
        cfg.lambda = lambda;
        const SolveResult res = lrat_solve(instance.tensor, cfg);
        out.push_back({lambda, res.estimated_rank});
    }
    return out;
}

std::vector<CellSpec> default_rank_study_cells() {
    std::vector<CellSpec> cells;
    const std::vector<std::pair<Index, std::vector<Index>>> grid = {
        {5, {2, 3, 4}},
        {10, {2, 3, 4, 5, 8}},
        {20, {2, 3, 4, 5, 8, 10, 15}},
    };
    for (const auto& [n, cns] : grid)
        for (Index cn : cns)
            cells.push_back({{n, n, n}, cn});
    return cells;
}

RankStudyReport rank_study(const std::vector<CellSpec>& cells, Index trials,
                           std::uint64_t base_seed, const SolverConfig& base_cfg, int jobs) {
    if (trials < 1)
        throw std::invalid_argument("rank_study: trials must be >= 1");
    RankStudyReport report;
    report.rows.resize(cells.size() * trials);

    for (size_t c = 0; c < cells.size(); ++c) {
        const CellSpec& cell = cells[c];
        TrialRow* rows = report.rows.data() + c * trials;
        parallel_trials(trials, jobs, [&, rows](Index t) {
            const auto t0 = std::chrono::steady_clock::now();
            const std::uint64_t seed = base_seed + std::uint64_t(t);
            const GroundTruth instance = gen_random_lowrank(cell.dims, cell.cn, seed);

            SolverConfig cfg = base_cfg;
            cfg.R = cell.dims[0];
            cfg.seed = seed;
            const LambdaEstimate est = estimate_lambda(instance.tensor, cfg.R, cfg);
            cfg.lambda = est.lambda_hat;
            const SolveResult res = lrat_solve(instance.tensor, cfg);

            const double misfit =
                (vectorize(instance.tensor) - vectorize(reconstruct(res.factors))).norm();
            const double scale = instance.tensor.frobenius_norm();
            const auto t1 = std::chrono::steady_clock::now();

            TrialRow& row = rows[t];
            row.dims = cell.dims;
            row.cn = cell.cn;
            row.trial = t;
            row.r_hat = res.estimated_rank;
            row.rel_residual = scale > 0 ? misfit / scale : misfit;
            row.iterations = res.iterations;
            row.ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        });

        std::vector<double> ranks(trials);
        for (Index t = 0; t < trials; ++t)
            ranks[t] = double(rows[t].r_hat);
        const double mean = std::accumulate(ranks.begin(), ranks.end(), 0.0) / double(trials);
        report.cells.push_back({cell, mean, sample_std(ranks, mean)});
    }
    return report;
}

ComparisonResult compare_solvers(const std::array<Index, 3>& dims, Index cn, Index R,
                                 std::uint64_t seed, SolverConfig cfg) {
    const GroundTruth instance = gen_random_lowrank(dims, cn, seed);
    cfg.R = R;
    cfg.seed = seed;
    cfg.record_trace = true;

    const LambdaEstimate est = estimate_lambda(instance.tensor, R, cfg);
    cfg.lambda = est.lambda_hat;
    const SolveResult sparse = lrat_solve(instance.tensor, cfg);

    ComparisonResult out;
    out.lambda_hat = est.lambda_hat;
    out.unpenalized_trace = est.pilot.trace.value();
    out.penalized_trace = sparse.trace.value();
    return out;
}

ConsistencyResult consistency_experiment(const ConsistencySpec& spec) {
    if (spec.n < 1 || spec.R < 2 || spec.k < 1 || spec.k >= spec.R)
        throw std::invalid_argument("consistency_experiment: need n >= 1 and 1 <= k < R");
    if (!(spec.sigma2 >= 0.0))
        throw std::invalid_argument("consistency_experiment: sigma2 must be >= 0");
    if (!spec.lambda && spec.sigma2 == 0.0)
        throw std::invalid_argument("consistency_experiment: sigma2 = 0 requires an explicit lambda");
    if (spec.trials < 1)
        throw std::invalid_argument("consistency_experiment: trials must be >= 1");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<Index> support(spec.k);
    for (Index i = 0; i < spec.k; ++i)
        support[i] = i;

    // Resample the design until it is incoherent enough for the guarantee to
    // say anything (measured gap >= target) and has full column rank.
    Matrix design(spec.n, spec.R);
    ConsistencyDiagnostics probe;
    bool accepted = false;
    for (Index attempt = 0; attempt < spec.design_attempts && !accepted; ++attempt) {
        for (Index c = 0; c < spec.R; ++c) {
            for (Index i = 0; i < spec.n; ++i)
                design(i, c) = gauss(rng);
            design.col(c).normalize();
        }
        Eigen::SelfAdjointEigenSolver<Matrix> eig(design.transpose() * design);
        if (eig.eigenvalues().minCoeff() <= 1e-10)
            continue;
        try {
            probe = consistency_bound(design, support, 0.0, std::max(spec.sigma2, 1.0));
        } catch (const std::runtime_error&) {
            continue;
        }
        accepted = probe.gamma >= spec.gamma_target;
    }
    if (!accepted)
        throw std::runtime_error("consistency_experiment: no design met the incoherence "
                                 "target within the resampling budget");

    // Penalty: explicit, or calibrated so the failure term is exactly 1%.
    const double lambda =
        spec.lambda ? *spec.lambda
                    : std::sqrt(8.0 * spec.sigma2 * std::log(200.0 * double(spec.R))) /
                          probe.gamma;

    const ConsistencyDiagnostics diag =
        consistency_bound(design, support, lambda, spec.sigma2);

    // Planted signal: magnitudes 1.25x..2.25x the recovery floor, random signs.
    const double floor =
        lambda * (0.5 / std::sqrt(diag.mu) + diag.inv_inf_norm);
    const double base = floor > 0.0 ? floor : 1.0;
    Vector theta_star = Vector::Zero(spec.R);
    for (Index i : support) {
        const double mag = base * (1.25 + unif(rng));
        theta_star[i] = unif(rng) < 0.5 ? -mag : mag;
    }
    const Vector clean = design * theta_star;
    const double noise_sd = std::sqrt(spec.sigma2);

    ConsistencyResult out;
    out.lambda = lambda;
    out.gamma = diag.gamma;
    out.mu = diag.mu;
    out.bound = diag.bound;
    out.bound_vacuous = !(diag.bound > 0.0);
    out.rows.resize(spec.trials);

    Index hits = 0;
    Vector b(spec.n);
    for (Index t = 0; t < spec.trials; ++t) {
        for (Index i = 0; i < spec.n; ++i)
            b[i] = clean[i] + noise_sd * gauss(rng);
        const LassoSolution sol = lasso_solve_ista({design, b, lambda});
        const bool recovered = sol.support == support;
        out.rows[t] = {t, recovered};
        hits += recovered;
    }
    out.rate = double(hits) / double(spec.trials);
    return out;
}

} // namespace tensorank
