#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace tensorank::cli {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error(path + ": cannot open for writing");
    return os;
}

void write_json(const std::string& path, const json& j) {
    auto os = open_out(path);
    os << j.dump(2) << '\n';
}

void write_tensor(const std::string& path, const Tensor3& t) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
        write_json(path, io::tensor_to_json(t));
    else
        io::write_tns3(path, t);
}

double relative_residual(const Tensor3& a, const CpFactors& f) {
    const double misfit = (vectorize(a) - vectorize(reconstruct(f))).norm();
    const double scale = a.frobenius_norm();
    return scale > 0 ? misfit / scale : misfit;
}

std::vector<CellSpec> parse_cells(const std::string& text) {
    if (text.empty())
        return default_rank_study_cells();
    std::vector<CellSpec> cells;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw std::runtime_error("cells: expected size:cn pairs, got \"" + item + "\"");
        const Index n = std::stoll(item.substr(0, colon));
        const Index cn = std::stoll(item.substr(colon + 1));
        cells.push_back({{n, n, n}, cn});
    }
    return cells;
}

} // namespace

SolverConfig to_config(const SolverOptions& o) {
    SolverConfig cfg;
    cfg.R = o.rank;
    cfg.s = o.s;
    cfg.iter_max = o.iter_max;
    cfg.conv_tol = o.conv_tol;
    cfg.seed = o.seed;
    return cfg;
}

int run_gen(const GenOptions& o) {
    const GroundTruth instance = gen_random_lowrank(o.dims, o.cn, o.seed, o.noise);
    write_tensor(o.out, instance.tensor);
    if (!o.factors_out.empty())
        write_json(o.factors_out, io::factors_to_json(instance.factors));
    std::cout << "wrote " << o.dims[0] << "x" << o.dims[1] << "x" << o.dims[2] << " tensor ("
              << o.cn << " components, seed " << o.seed << ") to " << o.out << '\n';
    return 0;
}

int run_decompose(const DecomposeOptions& o) {
    const Tensor3 a = io::load_tensor(o.input);
    SolverConfig cfg = to_config(o.solver);
    cfg.record_trace = !o.trace_out.empty();
    cfg.lambda = o.lambda;

    std::optional<LambdaEstimate> est;
    if (o.auto_lambda) {
        est = estimate_lambda(a, cfg.R, cfg);
        cfg.lambda = est->lambda_hat;
    }
    const SolveResult res = lrat_solve(a, cfg);

    json summary = io::solve_result_to_json(res, est ? &*est : nullptr);
    summary["lambda"] = cfg.lambda;
    summary["relative_residual"] = relative_residual(a, res.factors);
    write_json(o.out, summary);

    if (!o.trace_out.empty()) {
        auto os = open_out(o.trace_out);
        io::write_trace_csv(os, res.trace.value());
    }
    if (!o.reconstruct_out.empty())
        write_tensor(o.reconstruct_out, reconstruct(res.factors));

    std::cout << "estimated rank: " << res.estimated_rank << " of bound " << cfg.R << '\n'
              << "lambda: " << io::format_double(cfg.lambda)
              << (o.auto_lambda ? " (data-driven)" : "") << '\n'
              << "iterations: " << res.iterations << (res.converged ? " (converged)" : "")
              << '\n'
              << "relative residual: "
              << io::format_double(summary["relative_residual"].get<double>()) << '\n';
    return 0;
}

int run_estimate_rank(const EstimateRankOptions& o) {
    const Tensor3 a = io::load_tensor(o.input);
    SolverConfig cfg = to_config(o.solver);
    const LambdaEstimate est = estimate_lambda(a, cfg.R, cfg);
    cfg.lambda = est.lambda_hat;
    const SolveResult res = lrat_solve(a, cfg);

    json summary = io::solve_result_to_json(res, &est);
    summary["relative_residual"] = relative_residual(a, res.factors);
    write_json(o.out, summary);

    std::cout << "sigma2_hat: " << io::format_double(est.sigma2_hat) << '\n'
              << "gamma_hat: " << io::format_double(est.gamma_hat) << '\n'
              << "lambda_hat: " << io::format_double(est.lambda_hat) << '\n'
              << "estimated rank: " << res.estimated_rank << " of bound " << cfg.R << '\n';
    return 0;
}

int run_sweep(const SweepOptions& o) {
    SolverConfig cfg = to_config(o.solver);
    const auto points = sweep_lambda(o.dims, o.cn, o.rank,
                                     lambda_grid(o.lambda_max, o.lambda_step), o.seed, cfg);
    auto os = open_out(o.out);
    io::write_sweep_csv(os, points);
    std::cout << "swept " << points.size() << " lambda values, R_hat " << points.front().r_hat
              << " at lambda 0 down to " << points.back().r_hat << " at lambda "
              << io::format_double(points.back().lambda) << '\n';
    return 0;
}

int run_rank_study(const RankStudyOptions& o) {
    const auto cells = parse_cells(o.cells);
    const RankStudyReport report =
        rank_study(cells, o.trials, o.seed, to_config(o.solver), o.jobs);
    auto os = open_out(o.out);
    io::write_rank_study_csv(os, report);
    for (const CellStats& c : report.cells)
        std::cout << c.cell.dims[0] << "x" << c.cell.dims[1] << "x" << c.cell.dims[2]
                  << " cn=" << c.cell.cn << ": mean " << io::format_double(c.mean_rank)
                  << ", std " << io::format_double(c.std_rank) << '\n';
    return 0;
}

int run_compare(const CompareOptions& o) {
    const ComparisonResult cmp =
        compare_solvers(o.dims, o.cn, o.rank, o.seed, to_config(o.solver));
    auto os = open_out(o.out);
    io::write_compare_csv(os, cmp);
    std::cout << "lambda_hat: " << io::format_double(cmp.lambda_hat) << '\n'
              << "final residual (lambda=0): "
              << io::format_double(2.0 * cmp.unpenalized_trace.back().residual_half) << '\n'
              << "final residual (penalized): "
              << io::format_double(2.0 * cmp.penalized_trace.back().residual_half) << '\n';
    return 0;
}

int run_consistency(const ConsistencyOptions& o) {
    ConsistencySpec spec;
    spec.n = o.n;
    spec.R = o.r;
    spec.k = o.k;
    spec.sigma2 = o.sigma2;
    spec.gamma_target = o.gamma_target;
    spec.trials = o.trials;
    spec.lambda = o.lambda;
    spec.seed = o.seed;
    const ConsistencyResult res = consistency_experiment(spec);

    auto os = open_out(o.out);
    io::write_consistency_csv(os, res);
    std::cout << "recovery rate: " << io::format_double(res.rate) << " over " << o.trials
              << " trials\n"
              << "bound: " << io::format_double(res.bound)
              << (res.bound_vacuous ? " (vacuous)" : "") << '\n'
              << "gamma: " << io::format_double(res.gamma)
              << ", lambda: " << io::format_double(res.lambda) << '\n';
    return 0;
}

int run_video(const VideoOptions& o) {
    std::vector<std::string> manifest;
    if (!o.list_file.empty()) {
        std::ifstream is(o.list_file);
        if (!is)
            throw std::runtime_error(o.list_file + ": cannot open manifest");
        std::string line;
        while (std::getline(is, line))
            if (!line.empty())
                manifest.push_back(line);
    }
    const Tensor3 stack = io::ingest_frames(o.frames_dir, o.region, manifest);
    const Index w = stack.extent0(), h = stack.extent1(), frames = stack.extent2();

    SolverConfig cfg = to_config(o.solver);
    std::optional<LambdaEstimate> est;
    if (o.lambda) {
        cfg.lambda = *o.lambda;
    } else {
        est = estimate_lambda(stack, cfg.R, cfg);
        cfg.lambda = est->lambda_hat;
    }
    const SolveResult res = lrat_solve(stack, cfg);

    const Index per_component = w + h + frames;
    const double rel = relative_residual(stack, res.factors);

    json summary = io::solve_result_to_json(res, est ? &*est : nullptr);
    summary["lambda"] = cfg.lambda;
    summary["frames"] = frames;
    summary["frame_width"] = w;
    summary["frame_height"] = h;
    summary["storage_factored"] = per_component * res.estimated_rank;
    summary["storage_upper"] = per_component * cfg.R;
    summary["relative_residual"] = rel;
    write_json(o.out, summary);

    std::cout << "frames: " << frames << " of " << w << "x" << h << '\n'
              << "estimated rank: " << res.estimated_rank << " of bound " << cfg.R << '\n'
              << "storage: (" << w << "+" << h << "+" << frames << ") x "
              << res.estimated_rank << " = " << per_component * res.estimated_rank << " vs ("
              << w << "+" << h << "+" << frames << ") x " << cfg.R << " = "
              << per_component * cfg.R << " at the bound\n"
              << "relative residual: " << io::format_double(rel) << '\n';
    return 0;
}

} // namespace tensorank::cli
