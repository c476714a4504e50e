#include "tbem/commands.hpp"

#include <chrono>
#include <iostream>

#include <json.hpp>

#include "tbem/output.hpp"

namespace tbem {

namespace {

using nlohmann::json;

void log(const RunOptions &opts, const std::string &msg)
{
    if (!opts.quiet)
        std::cerr << msg << '\n';
}

std::vector<double> to_std(const Vector &v) { return {v.data(), v.data() + v.size()}; }

json densities_json(const DensitySet &d)
{
    return json{{"mu_o", to_std(d.mu_o)},
                {"mu_i", to_std(d.mu_i)},
                {"eta_i", to_std(d.eta_i)},
                {"rho_o", d.rho_o},
                {"rho_i", d.rho_i}};
}

std::string trace_csv(const std::vector<IterationRecord> &trace)
{
    CsvTable t({"iteration", "method", "residual", "step"});
    for (const auto &r : trace)
        t.add_row({std::to_string(r.iteration), r.method, format_double(r.residual), format_double(r.step)});
    return t.str();
}

std::string probes_csv(const ProbeSet &probes, const std::vector<double> &values)
{
    CsvTable t({"kind", "x", "y", "value"});
    std::size_t k = 0;
    for (const Vec2 &p : probes.interior)
        t.add_row({"inner", format_double(p.x), format_double(p.y), format_double(values[k++])});
    for (const Vec2 &p : probes.exterior)
        t.add_row({"outer", format_double(p.x), format_double(p.y), format_double(values[k++])});
    return t.str();
}

std::string field_csv(const HarmonicPair &pair, std::size_t grid)
{
    const DiscreteBoundary &outer = pair.outer();
    const DiscreteBoundary &inner = pair.inner();
    double x0 = outer.nodes[0].x, x1 = x0, y0 = outer.nodes[0].y, y1 = y0;
    for (const Vec2 &p : outer.nodes) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    const double band_o = 3.0 * outer.mesh_width();
    const double band_i = 3.0 * inner.mesh_width();
    CsvTable t({"x", "y", "region", "value"});
    for (std::size_t iy = 0; iy < grid; ++iy) {
        for (std::size_t ix = 0; ix < grid; ++ix) {
            const Vec2 p{x0 + (x1 - x0) * static_cast<double>(ix) / static_cast<double>(grid - 1),
                         y0 + (y1 - y0) * static_cast<double>(iy) / static_cast<double>(grid - 1)};
            const Region r = pair.region(p);
            const bool near = distance_to_polygon(outer, p) <= band_o || distance_to_polygon(inner, p) <= band_i;
            if (r == Region::Outside || near) {
                t.add_row({format_double(p.x), format_double(p.y), "skip", ""});
                continue;
            }
            const bool in = r == Region::Inner;
            t.add_row({format_double(p.x), format_double(p.y), in ? "inner" : "outer",
                       format_double(in ? pair.u_inner(p) : pair.u_outer(p))});
        }
    }
    return t.str();
}

std::string label(const Vec2 &p)
{
    return format_double(p.x) + " " + format_double(p.y);
}

}  // namespace

Problem discretize_problem(const ProblemConfig &cfg, std::size_t n)
{
    return {discretize(orient_counterclockwise(cfg.outer.build()), n),
            discretize(orient_counterclockwise(cfg.inner.build()), n)};
}

SolverOptions solver_options(const ProblemConfig &cfg, std::size_t n)
{
    SolverOptions o = cfg.solver;
    if (cfg.picard_A) {
        const auto &a = *cfg.picard_A;
        o.picard_matrix = MatrixField::constant(n, a[0], a[1], a[2], a[3]);
    }
    return o;
}

int cmd_solve(const ProblemConfig &cfg, const RunOptions &opts)
{
    const Problem prob = discretize_problem(cfg, cfg.N);
    const TransmissionSystem system(prob.outer, prob.inner, prob.inner.nodes, cfg.data);
    log(opts, "solve: N = " + std::to_string(cfg.N));

    SolveResult result;
    try {
        result = solve_system(system, DensitySet::zeros(cfg.N, cfg.N), solver_options(cfg, cfg.N));
    } catch (const NonConvergenceError &e) {
        write_atomic(opts.out_dir / cfg.output.trace, trace_csv(e.trace()));
        log(opts, std::string("solve: ") + e.what());
        return kExitNonConvergence;
    }
    log(opts, "solve: residual " + format_double(result.residual) + " after "
                  + std::to_string(result.picard_steps) + " Picard and " + std::to_string(result.newton_steps)
                  + " Newton steps");

    const HarmonicPair pair = reconstruct_solution(result.densities, prob.outer, prob.inner);
    json doc = densities_json(result.densities);
    doc["N"] = cfg.N;
    doc["residual"] = result.residual;
    doc["picard_steps"] = result.picard_steps;
    doc["newton_steps"] = result.newton_steps;
    doc["near_interaction"] = system.blocks().near_interaction;

    const std::string probes = probes_csv(cfg.probes, probe_values(pair, cfg.probes));
    const std::string field = field_csv(pair, cfg.output.grid);
    write_atomic(opts.out_dir / cfg.output.trace, trace_csv(result.trace));
    write_atomic(opts.out_dir / cfg.output.densities, doc.dump(1) + "\n");
    write_atomic(opts.out_dir / cfg.output.probes, probes);
    write_atomic(opts.out_dir / cfg.output.field, field);
    return kExitOk;
}

int cmd_perturb(const ProblemConfig &cfg, const RunOptions &opts)
{
    if (cfg.shape.family.empty())
        throw ConfigError({"[shape] perturb needs a family"});
    const Problem prob = discretize_problem(cfg, cfg.N);
    const TransmissionSystem system(prob.outer, prob.inner, prob.inner.nodes, cfg.data);

    SolveResult start;
    try {
        start = solve_system(system, DensitySet::zeros(cfg.N, cfg.N), solver_options(cfg, cfg.N));
    } catch (const NonConvergenceError &e) {
        write_atomic(opts.out_dir / cfg.output.trace, trace_csv(e.trace()));
        log(opts, std::string("perturb: unperturbed solve failed: ") + e.what());
        return kExitNonConvergence;
    }

    const ShapeFamily family = cfg.shape.build(*prob.inner.curve);
    BranchOptions bo;
    bo.steps = cfg.shape.steps;
    bo.s_max = cfg.shape.s_max;
    bo.predictor_order = cfg.shape.predictor_order;
    bo.tol = cfg.shape.tol;
    log(opts, "perturb: continuing to s = " + format_double(bo.s_max) + " in " + std::to_string(bo.steps)
                  + " steps");
    const Branch branch = continue_branch(family, prob.outer, cfg.N, cfg.data, start.densities, cfg.probes, bo);

    std::vector<std::string> header{"s", "residual_norm", "rho_o", "rho_i"};
    for (std::size_t k = 0; k < cfg.probes.size(); ++k)
        header.push_back("probe_" + std::to_string(k));
    CsvTable bt(header);
    for (const BranchPoint &p : branch.points) {
        std::vector<std::string> row{format_double(p.s), format_double(p.residual_norm),
                                     format_double(p.densities.rho_o), format_double(p.densities.rho_i)};
        for (double v : p.probe_values)
            row.push_back(format_double(v));
        bt.add_row(row);
    }

    json summary;
    summary["evidence"] = "smoothness evidence (finite differences along the branch, not a proof)";
    summary["complete"] = branch.complete;
    summary["points"] = branch.points.size();
    summary["failed_s"] = branch.failed_s ? json(*branch.failed_s) : json(nullptr);
    summary["error"] = branch.error;
    summary["probes"] = json::array();

    CsvTable dt({"probe", "order", "s", "d_h", "d_2h", "d_4h", "richardson"});
    for (std::size_t k = 0; k < cfg.probes.size(); ++k) {
        const bool interior = k < cfg.probes.interior.size();
        const Vec2 p = interior ? cfg.probes.interior[k] : cfg.probes.exterior[k - cfg.probes.interior.size()];
        json pj{{"index", k}, {"kind", interior ? "inner" : "outer"}, {"point", label(p)}};
        try {
            const SmoothnessReport rep = smoothness_probe(branch.points, k, cfg.shape.max_order);
            for (const auto &e : rep.estimates)
                dt.add_row({std::to_string(k), std::to_string(e.order), format_double(e.s), format_double(e.d_h),
                            format_double(e.d_2h), e.d_4h ? format_double(*e.d_4h) : "",
                            e.richardson ? format_double(*e.richardson) : ""});
            pj["orders"] = json::array();
            for (std::size_t o = 0; o < rep.median_ratio.size(); ++o)
                pj["orders"].push_back({{"order", o + 1},
                                        {"median_richardson", rep.median_ratio[o] ? json(*rep.median_ratio[o])
                                                                                  : json(nullptr)},
                                        {"stabilized", static_cast<bool>(rep.stabilized[o])}});
        } catch (const std::invalid_argument &e) {
            pj["note"] = e.what();
        }
        summary["probes"].push_back(pj);
    }

    write_atomic(opts.out_dir / cfg.output.branch, bt.str());
    write_atomic(opts.out_dir / cfg.output.derivatives, dt.str());
    write_atomic(opts.out_dir / cfg.output.smoothness, summary.dump(1) + "\n");
    if (cfg.output.branch_densities) {
        json all = json::array();
        for (const BranchPoint &p : branch.points) {
            json d = densities_json(p.densities);
            d["s"] = p.s;
            all.push_back(d);
        }
        write_atomic(opts.out_dir / "branch_densities.json", all.dump(1) + "\n");
    }

    if (!branch.complete) {
        log(opts, "perturb: branch stopped at s = " + format_double(branch.failed_s.value_or(0.0)) + ": "
                      + branch.error);
        return kExitNonConvergence;
    }
    return kExitOk;
}

int cmd_convergence(const ProblemConfig &cfg, const RunOptions &opts)
{
    std::vector<std::size_t> levels;
    for (std::size_t n = 16; n <= std::min<std::size_t>(256, cfg.max_N); n *= 2)
        levels.push_back(n);

    std::vector<std::vector<double>> values;
    std::vector<double> seconds;
    bool failed = false;
    for (std::size_t n : levels) {
        const auto t0 = std::chrono::steady_clock::now();
        const Problem prob = discretize_problem(cfg, n);
        try {
            const TransmissionSystem system(prob.outer, prob.inner, prob.inner.nodes, cfg.data);
            const SolveResult r = solve_system(system, DensitySet::zeros(n, n), solver_options(cfg, n));
            values.push_back(probe_values(reconstruct_solution(r.densities, prob.outer, prob.inner), cfg.probes));
        } catch (const NonConvergenceError &e) {
            log(opts, "convergence: N = " + std::to_string(n) + ": " + e.what());
            failed = true;
            break;
        }
        seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        log(opts, "convergence: N = " + std::to_string(n) + " done");
    }

    const std::size_t m = cfg.probes.size();
    std::vector<std::string> header{"N"};
    for (std::size_t k = 0; k < m; ++k)
        header.push_back("value_" + std::to_string(k));
    for (std::size_t k = 0; k < m; ++k)
        header.push_back("delta_" + std::to_string(k));
    header.push_back("runtime_s");
    CsvTable t(header);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::vector<std::string> row{std::to_string(levels[i])};
        for (double v : values[i])
            row.push_back(format_double(v));
        for (std::size_t k = 0; k < m; ++k)
            row.push_back(i + 1 < values.size() ? format_double(std::abs(values[i][k] - values.back()[k])) : "");
        row.push_back(format_double(seconds[i]));
        t.add_row(row);
    }
    write_atomic(opts.out_dir / cfg.output.convergence, t.str());
    return failed ? kExitNonConvergence : kExitOk;
}

int run_command(const std::string &command, const std::string &config_path, const RunOptions &opts)
{
    try {
        const ProblemConfig cfg = load_config(config_path);
        if (command == "solve")
            return cmd_solve(cfg, opts);
        if (command == "perturb")
            return cmd_perturb(cfg, opts);
        if (command == "convergence")
            return cmd_convergence(cfg, opts);
        if (command == "verify")
            return cmd_verify(cfg, opts);
        std::cerr << "unknown command '" << command << "'\n";
        return kExitConfig;
    } catch (const ConfigError &e) {
        std::cerr << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace tbem
