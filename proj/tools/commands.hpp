#pragma once

#include "tensorank/io.hpp"

#include <optional>
#include <string>

namespace tensorank::cli {

/// Solver knobs shared by every command that runs a decomposition.
struct SolverOptions {
    Index rank = 1;
    double s = 1.5;
    Index iter_max = 10000;
    double conv_tol = 1e-10;
    std::uint64_t seed = 0;
};

SolverConfig to_config(const SolverOptions& o);

struct GenOptions {
    std::array<Index, 3> dims{5, 5, 5};
    Index cn = 3;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::string out;         ///< .json writes the JSON form, anything else TNS3
    std::string factors_out; ///< optional ground-truth factor dump
};
int run_gen(const GenOptions& o);

struct DecomposeOptions {
    std::string input;
    SolverOptions solver;
    double lambda = 0.0;
    bool auto_lambda = false; ///< select lambda from the data via a pilot run
    std::string out;          ///< solve summary JSON
    std::string trace_out;    ///< optional per-iteration CSV
    std::string reconstruct_out; ///< optional reconstructed tensor (TNS3)
};
int run_decompose(const DecomposeOptions& o);

struct EstimateRankOptions {
    std::string input;
    SolverOptions solver;
    std::string out; ///< JSON with the selected lambda and the resulting rank
};
int run_estimate_rank(const EstimateRankOptions& o);

struct SweepOptions {
    std::array<Index, 3> dims{10, 10, 10};
    Index cn = 5;
    Index rank = 10;
    double lambda_max = 0.1;
    double lambda_step = 0.001;
    SolverOptions solver;
    std::uint64_t seed = 0;
    std::string out; ///< CSV lambda,R_hat
};
int run_sweep(const SweepOptions& o);

struct RankStudyOptions {
    std::string cells; ///< "5:3,10:5" as size:cn pairs; empty = default grid
    Index trials = 100;
    int jobs = 1;
    SolverOptions solver;
    std::uint64_t seed = 0;
    std::string out; ///< CSV I,J,K,cn,trial,R_hat,residual,iters,ms
};
int run_rank_study(const RankStudyOptions& o);

struct CompareOptions {
    std::array<Index, 3> dims{5, 5, 5};
    Index cn = 3;
    Index rank = 5;
    SolverOptions solver;
    std::uint64_t seed = 0;
    std::string out; ///< CSV iter,residual_lrat,residual_modals,objective_lrat
};
int run_compare(const CompareOptions& o);

struct ConsistencyOptions {
    Index n = 200;
    Index r = 10;
    Index k = 3;
    double sigma2 = 1e-3;
    double gamma_target = 0.5;
    Index trials = 500;
    std::optional<double> lambda; ///< empty: calibrated so the bound is 0.99
    std::uint64_t seed = 0;
    std::string out; ///< CSV trial,recovered,bound
};
int run_consistency(const ConsistencyOptions& o);

struct VideoOptions {
    std::string frames_dir;
    std::string list_file; ///< optional manifest, one frame filename per line
    io::CropRegion region; ///< width/height 0 means the full frame
    SolverOptions solver;
    std::optional<double> lambda; ///< empty: data-driven selection
    std::string out; ///< summary JSON
};
int run_video(const VideoOptions& o);

} // namespace tensorank::cli
