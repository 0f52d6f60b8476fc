#include "commands.hpp"

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

namespace {

using namespace tensorank;
using namespace tensorank::cli;

int default_jobs() {
    if (const char* env = std::getenv("TENSORANK_JOBS")) {
        const int v = std::atoi(env);
        if (v >= 1)
            return v;
    }
    return 1;
}

void add_solver_options(CLI::App* cmd, SolverOptions& o, bool with_rank = true) {
    if (with_rank)
        cmd->add_option("-R,--rank", o.rank, "Number of components in the working model")
            ->required();
    cmd->add_option("--s", o.s, "Step control parameter, must be > 1")
        ->capture_default_str();
    cmd->add_option("--iter-max", o.iter_max, "Outer iteration cap")->capture_default_str();
    cmd->add_option("--conv-tol", o.conv_tol, "Relative objective-decrease stop threshold")
        ->capture_default_str();
}

std::function<void(const std::string&)> dims_parser(std::array<Index, 3>& dims) {
    return [&dims](const std::string& text) {
        std::array<Index, 3> parsed{};
        size_t pos = 0;
        for (int i = 0; i < 3; ++i) {
            size_t used = 0;
            parsed[i] = std::stoll(text.substr(pos), &used);
            pos += used;
            if (i < 2) {
                if (pos >= text.size() || (text[pos] != ',' && text[pos] != 'x'))
                    throw CLI::ValidationError("--dims", "expected I,J,K or IxJxK");
                ++pos;
            }
        }
        if (pos != text.size())
            throw CLI::ValidationError("--dims", "expected I,J,K or IxJxK");
        dims = parsed;
    };
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse low-rank CP decomposition and rank estimation for third-order tensors"};
    app.require_subcommand(1);

    GenOptions gen;
    auto* cmd_gen = app.add_subcommand("gen", "Generate a random low-rank tensor");
    cmd_gen->add_option_function<std::string>("--dims", dims_parser(gen.dims),
                                              "Extents as I,J,K");
    cmd_gen->add_option("--cn", gen.cn, "Number of planted rank-one components")->required();
    cmd_gen->add_option("--noise", gen.noise, "Additive Gaussian noise standard deviation")
        ->capture_default_str();
    cmd_gen->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
    cmd_gen->add_option("-o,--out", gen.out, "Output tensor (.json for JSON, else TNS3)")
        ->required();
    cmd_gen->add_option("--factors-out", gen.factors_out, "Also dump the planted factors");

    DecomposeOptions dec;
    auto* cmd_dec = app.add_subcommand("decompose", "Sparse CP decomposition of a tensor file");
    cmd_dec->add_option("input", dec.input, "Tensor file (TNS3 or JSON)")->required();
    add_solver_options(cmd_dec, dec.solver);
    cmd_dec->add_option("--lambda", dec.lambda, "l1 penalty weight")->capture_default_str();
    cmd_dec->add_flag("--auto-lambda", dec.auto_lambda,
                      "Select lambda from the data via an unpenalized pilot run");
    cmd_dec->add_option("--seed", dec.solver.seed, "RNG seed")->capture_default_str();
    cmd_dec->add_option("-o,--out", dec.out, "Solve summary JSON")->required();
    cmd_dec->add_option("--trace", dec.trace_out, "Per-iteration trace CSV");
    cmd_dec->add_option("--reconstruct", dec.reconstruct_out, "Reconstructed tensor output");

    EstimateRankOptions est;
    auto* cmd_est = app.add_subcommand("estimate-rank",
                                       "Estimate the rank with a data-driven penalty");
    cmd_est->add_option("input", est.input, "Tensor file (TNS3 or JSON)")->required();
    add_solver_options(cmd_est, est.solver);
    cmd_est->add_option("--seed", est.solver.seed, "RNG seed")->capture_default_str();
    cmd_est->add_option("-o,--out", est.out, "Summary JSON")->required();

    SweepOptions sweep;
    auto* cmd_sweep = app.add_subcommand("sweep-lambda",
                                         "Estimated rank across a lambda grid");
    cmd_sweep->add_option_function<std::string>("--dims", dims_parser(sweep.dims),
                                                "Extents as I,J,K");
    cmd_sweep->add_option("--cn", sweep.cn, "Planted components")->capture_default_str();
    cmd_sweep->add_option("-R,--rank", sweep.rank, "Component bound")->capture_default_str();
    cmd_sweep->add_option("--lambda-max", sweep.lambda_max, "Grid upper end")
        ->capture_default_str();
    cmd_sweep->add_option("--lambda-step", sweep.lambda_step, "Grid spacing")
        ->capture_default_str();
    add_solver_options(cmd_sweep, sweep.solver, false);
    cmd_sweep->add_option("--seed", sweep.seed, "RNG seed")->capture_default_str();
    cmd_sweep->add_option("-o,--out", sweep.out, "Output CSV")->required();

    RankStudyOptions study;
    auto* cmd_study = app.add_subcommand(
        "table1", "Rank-estimation accuracy study over a grid of sizes and ranks");
    cmd_study->add_option("--cells", study.cells,
                          "size:cn pairs, e.g. 5:3,10:5 (default: the full grid)");
    cmd_study->add_option("--trials", study.trials, "Trials per cell")->capture_default_str();
    study.jobs = default_jobs();
    cmd_study->add_option("--jobs", study.jobs, "Worker threads (env TENSORANK_JOBS)")
        ->capture_default_str();
    add_solver_options(cmd_study, study.solver, false);
    cmd_study->add_option("--seed", study.seed, "Base seed; trial t uses seed + t")
        ->capture_default_str();
    cmd_study->add_option("-o,--out", study.out, "Output CSV")->required();

    CompareOptions cmp;
    auto* cmd_cmp = app.add_subcommand(
        "compare", "Penalized vs unpenalized solver traces on one instance");
    cmd_cmp->add_option_function<std::string>("--dims", dims_parser(cmp.dims),
                                              "Extents as I,J,K");
    cmd_cmp->add_option("--cn", cmp.cn, "Planted components")->capture_default_str();
    cmd_cmp->add_option("-R,--rank", cmp.rank, "Component bound")->capture_default_str();
    add_solver_options(cmd_cmp, cmp.solver, false);
    cmd_cmp->add_option("--seed", cmp.seed, "RNG seed")->capture_default_str();
    cmd_cmp->add_option("-o,--out", cmp.out, "Output CSV")->required();

    ConsistencyOptions cons;
    auto* cmd_cons = app.add_subcommand(
        "consistency", "Monte Carlo check of the lasso support-recovery bound");
    cmd_cons->add_option("--n", cons.n, "Observations")->capture_default_str();
    cmd_cons->add_option("-R,--columns", cons.r, "Design columns")->capture_default_str();
    cmd_cons->add_option("--k", cons.k, "True support size")->capture_default_str();
    cmd_cons->add_option("--sigma2", cons.sigma2, "Noise variance")->capture_default_str();
    cmd_cons->add_option("--gamma", cons.gamma_target, "Incoherence gap filter")
        ->capture_default_str();
    cmd_cons->add_option("--trials", cons.trials, "Trials")->capture_default_str();
    double cons_lambda = -1.0;
    cmd_cons
        ->add_option("--lambda", cons_lambda,
                     "Penalty (default: calibrated so the bound is 0.99)")
        ->check(CLI::NonNegativeNumber);
    cmd_cons->add_option("--seed", cons.seed, "RNG seed")->capture_default_str();
    cmd_cons->add_option("-o,--out", cons.out, "Output CSV")->required();

    VideoOptions vid;
    std::string region_text;
    auto* cmd_vid = app.add_subcommand(
        "video", "Decompose a directory of PGM frames as a width x height x time tensor");
    cmd_vid->add_option("frames", vid.frames_dir, "Directory of .pgm frames")->required();
    cmd_vid->add_option("--list", vid.list_file,
                        "Manifest of frame filenames, one per line, in stacking order");
    cmd_vid->add_option("--region", region_text, "Crop as x,y,width,height");
    add_solver_options(cmd_vid, vid.solver);
    double vid_lambda = -1.0;
    cmd_vid->add_option("--lambda", vid_lambda, "Fixed penalty instead of the data-driven one")
        ->check(CLI::NonNegativeNumber);
    cmd_vid->add_option("--seed", vid.solver.seed, "RNG seed")->capture_default_str();
    cmd_vid->add_option("-o,--out", vid.out, "Summary JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_gen->parsed())
            return run_gen(gen);
        if (cmd_dec->parsed())
            return run_decompose(dec);
        if (cmd_est->parsed())
            return run_estimate_rank(est);
        if (cmd_sweep->parsed())
            return run_sweep(sweep);
        if (cmd_study->parsed())
            return run_rank_study(study);
        if (cmd_cmp->parsed()) {
            return run_compare(cmp);
        }
        if (cmd_cons->parsed()) {
            if (cons_lambda >= 0)
                cons.lambda = cons_lambda;
            return run_consistency(cons);
        }
        if (cmd_vid->parsed()) {
            if (vid_lambda >= 0)
                vid.lambda = vid_lambda;
            if (!region_text.empty()) {
                std::array<Index, 4> r{};
                size_t pos = 0;
                for (int i = 0; i < 4; ++i) {
                    size_t used = 0;
                    r[i] = std::stoll(region_text.substr(pos), &used);
                    pos += used;
                    if (i < 3 && (pos >= region_text.size() || region_text[pos] != ','))
                        throw std::runtime_error("--region expects x,y,width,height");
                    ++pos;
                }
                vid.region = {r[0], r[1], r[2], r[3]};
            }
            return run_video(vid);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
