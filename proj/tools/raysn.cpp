// SPDX-License-Identifier: Apache-2.0
//
// Batch front-end for the rotated discrete-ordinates solver:
//   quad-table  octahedral quadrature accuracy table and CSV dump
//   run         one simulation, artifacts to an output directory
//   verify      property suites of every module
//   sweep       metric comparison grid over rotation strength and order

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "raysn/analysis.hpp"
#include "raysn/io.hpp"
#include "raysn/problem.hpp"
#include "raysn/quadrature.hpp"
#include "raysn/solver.hpp"
#include "raysn/verify.hpp"
#include "raysn/version.hpp"

namespace fs = std::filesystem;
using namespace raysn;

namespace {

struct RunOptions {
    std::string problem = "line-source";
    std::string config_path;
    std::string quad = "octahedral";
    int order_n = 6;
    double delta = 8.0;
    std::string schedule = "random_each_step";
    int spatial_order = 2;
    double cfl = 0.5;
    std::uint64_t seed = 42;
    bool conserve = false;
    std::string out_dir = "out";
    std::vector<double> snapshots;
    int cells = 0;       // 0 = problem default resolution
    double t_end = 0.0;  // 0 = problem default
};

RotationSchedule parse_schedule(const std::string& name) {
    if (name == "none") return RotationSchedule::none;
    if (name == "random_each_step") return RotationSchedule::random_each_step;
    if (name == "forth_and_back") return RotationSchedule::forth_and_back;
    if (name == "double_half_step") return RotationSchedule::double_half_step;
    throw CLI::ValidationError("--schedule", "unknown schedule '" + name + "'");
}

SolverConfig solver_config(const RunOptions& opt) {
    SolverConfig config;
    config.quadrature = opt.quad == "product" ? QuadratureKind::product : QuadratureKind::octahedral;
    config.order = opt.order_n;
    config.spatial_order = opt.spatial_order;
    config.cfl = opt.cfl;
    config.delta = opt.delta;
    config.schedule = parse_schedule(opt.schedule);
    config.conserve_mass = opt.conserve;
    config.seed = opt.seed;
    return config;
}

ProblemSpec load_problem(const RunOptions& opt) {
    ProblemSpec problem;
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) throw std::runtime_error("cannot read config file: " + opt.config_path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        problem = problem_from_config(buffer.str());
    } else if (opt.problem == "line-source") {
        LineSourceParams params;
        if (opt.cells > 0) params.nx = params.ny = opt.cells;
        if (opt.t_end > 0) params.t_end = opt.t_end;
        problem = make_line_source(params);
    } else if (opt.problem == "lattice") {
        LatticeParams params;
        if (opt.cells > 0) params.nx = params.ny = opt.cells;
        if (opt.t_end > 0) params.t_end = opt.t_end;
        problem = make_lattice(params);
    } else {
        throw std::runtime_error("unknown problem '" + opt.problem + "' (expected line-source or lattice)");
    }
    if (!opt.config_path.empty()) {
        if (opt.cells > 0) {
            problem.mesh.nx = problem.mesh.ny = opt.cells;
            // repaint the fields at the new resolution through the config path
            throw std::runtime_error("--cells cannot override a --config problem; edit the config instead");
        }
        if (opt.t_end > 0) problem.t_end = opt.t_end;
    }
    return problem;
}

int cmd_quad_table(int max_n, const std::string& points_csv, int csv_order) {
    const auto rows = accuracy_table(max_n);
    std::printf("%4s %8s %16s %12s %16s %12s\n", "N", "N_q", "error(g)", "ratio", "error(h)", "ratio");
    bool counts_ok = true;
    for (const auto& row : rows) {
        counts_ok = counts_ok && row.point_count == octahedral_point_count(row.order);
        std::printf("%4d %8d %16.8g %12.6g %16.8g %12.6g\n", row.order, row.point_count, row.error_g,
                    row.ratio_g, row.error_h, row.ratio_h);
    }
    if (!points_csv.empty()) {
        const auto quad = build_octahedral_quadrature(csv_order);
        write_quadrature_csv(points_csv, quad.points, quad.weights);
        std::printf("wrote %s (N=%d, %zu points)\n", points_csv.c_str(), csv_order, quad.size());
    }
    if (!counts_ok) {
        std::fprintf(stderr, "point-count law 4N^2-8N+6 violated\n");
        return 1;
    }
    return 0;
}

int cmd_run(const RunOptions& opt) {
    const SolverConfig config = solver_config(opt);
    const ProblemSpec problem = load_problem(opt);

    fs::create_directories(opt.out_dir);
    std::vector<fs::path> written;
    auto artifact = [&](const std::string& name) {
        written.push_back(fs::path(opt.out_dir) / name);
        return written.back().string();
    };

    try {
        std::vector<double> pending = opt.snapshots;
        std::sort(pending.begin(), pending.end());
        StepObserver observer = [&](const StepView& view) {
            while (!pending.empty() && view.time >= pending.front() - 1e-12) {
                const DensityGrid rho = density(view.psi, view.weights, view.mesh);
                char name[64];
                std::snprintf(name, sizeof(name), "density_t%.6g.csv", view.time);
                write_density_csv(artifact(name), rho);
                pending.erase(pending.begin());
            }
        };

        const bool rotated = config.schedule != RotationSchedule::none && config.delta > 0.0;
        RunResult result =
            rotated ? run_rsn(config, problem, &observer) : run_sn(config, problem, &observer);

        const DensityGrid rho = density(result.psi, result.weights, result.mesh);
        write_density_csv(artifact("density.csv"), rho);
        if (problem.name == "lattice") {
            write_log_density_csv(artifact("logdensity.csv"), rho);
            write_cut_csv(artifact("cut_x1.csv"), extract_cut(rho, CutKind::vertical, 1.0));
            write_cut_csv(artifact("cut_y1.csv"), extract_cut(rho, CutKind::horizontal, 1.0));
        } else {
            const double yc = 0.5 * (problem.mesh.y_min + problem.mesh.y_max);
            write_cut_csv(artifact("cut_horizontal.csv"), extract_cut(rho, CutKind::horizontal, yc));
            write_cut_csv(artifact("cut_diagonal.csv"), extract_cut(rho, CutKind::diagonal));
        }
        result.manifest.emplace_back("version", version_string);
        write_manifest(artifact("manifest.txt"), result.manifest);

        std::printf("%s: %d steps, dt=%g, mass %.6g -> %.6g, rotation share %.1f%%\n",
                    problem.name.c_str(), result.steps, result.dt, result.initial_mass,
                    result.final_mass, 100.0 * result.rotation_share);
        std::printf("artifacts in %s\n", opt.out_dir.c_str());
        return 0;
    } catch (const std::exception& err) {
        for (const auto& path : written) fs::remove(path);
        RunManifest diagnostic;
        diagnostic.emplace_back("error", err.what());
        diagnostic.emplace_back("problem", problem.name);
        diagnostic.emplace_back("version", version_string);
        write_manifest((fs::path(opt.out_dir) / "manifest_error.txt").string(), diagnostic);
        std::fprintf(stderr, "run failed: %s\n", err.what());
        return 1;
    }
}

int cmd_verify(std::uint64_t seed) {
    const auto results = run_verification(seed);
    std::size_t failures = 0;
    for (const auto& result : results) {
        std::printf("[%s] %-60s %s\n", result.passed ? "PASS" : "FAIL", result.name.c_str(),
                    result.detail.c_str());
        if (!result.passed) ++failures;
    }
    std::printf("%zu/%zu checks passed\n", results.size() - failures, results.size());
    return failures == 0 ? 0 : 1;
}

int cmd_sweep(const RunOptions& base, const std::vector<double>& deltas, const std::vector<int>& orders,
              const std::vector<int>& product_orders) {
    fs::create_directories(base.out_dir);
    const std::string csv_path = (fs::path(base.out_dir) / "sweep.csv").string();
    auto csv = open_output(csv_path);
    csv << "quad,order_n,n_q,delta,schedule,ray_metric,cut_discrepancy,wall_seconds,rotation_share\n";

    auto evaluate = [&](const RunOptions& opt) {
        const SolverConfig config = solver_config(opt);
        const ProblemSpec problem = load_problem(opt);
        const bool rotated = config.schedule != RotationSchedule::none && config.delta > 0.0;
        const RunResult result = rotated ? run_rsn(config, problem) : run_sn(config, problem);
        const DensityGrid rho = density(result.psi, result.weights, result.mesh);

        double metric = 0.0, discrepancy = 0.0;
        if (problem.name == "lattice") {
            auto log_cut = [&](CutSeries cut) {
                for (double& v : cut.value) v = std::log10(std::max(v, 1e-10));
                return cut;
            };
            const auto cut_v = log_cut(extract_cut(rho, CutKind::vertical, 1.0));
            const auto cut_h = log_cut(extract_cut(rho, CutKind::horizontal, 1.0));
            metric = ray_metric(rho, 2.5);
            discrepancy = cut_discrepancy(cut_h, cut_v);
        } else {
            const double yc = 0.5 * (problem.mesh.y_min + problem.mesh.y_max);
            const auto cut_h = extract_cut(rho, CutKind::horizontal, yc);
            const auto cut_d = extract_cut(rho, CutKind::diagonal);
            metric = ray_metric(rho);
            discrepancy = cut_discrepancy(cut_h, cut_d);
        }
        csv << to_string(config.quadrature) << ',' << config.order << ',' << result.points.size() << ','
            << format_double(config.delta) << ',' << to_string(config.schedule) << ','
            << format_double(metric) << ',' << format_double(discrepancy) << ','
            << format_double(result.total_seconds) << ',' << format_double(result.rotation_share)
            << '\n';
        std::printf("%-10s N=%-3d N_q=%-5zu delta=%-4g metric=%.4f discrepancy=%.4g wall=%.1fs\n",
                    to_string(config.quadrature), config.order, result.points.size(), config.delta,
                    metric, discrepancy, result.total_seconds);
    };

    for (double delta : deltas)
        for (int order : orders) {
            RunOptions opt = base;
            opt.quad = "octahedral";
            opt.order_n = order;
            opt.delta = delta;
            evaluate(opt);
        }
    for (int order : product_orders) {
        RunOptions opt = base;
        opt.quad = "product";
        opt.order_n = order;
        opt.delta = 0.0;
        opt.schedule = "none";
        evaluate(opt);
    }
    std::printf("wrote %s\n", csv_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rotated discrete-ordinates radiation transport"};
    app.set_version_flag("--version", version_string);
    app.require_subcommand(1);

    auto* quad_table = app.add_subcommand("quad-table", "octahedral quadrature accuracy table");
    int max_n = 64;
    std::string points_csv;
    int csv_order = 8;
    quad_table->add_option("--max-n", max_n, "largest order (doubling from 2)")
        ->check(CLI::Range(2, 64));
    quad_table->add_option("--points-csv", points_csv, "also dump points/weights as CSV");
    quad_table->add_option("--csv-order-n", csv_order, "order for the CSV dump");

    RunOptions opt;
    auto add_run_options = [&](CLI::App* cmd) {
        cmd->add_option("--problem", opt.problem, "line-source | lattice");
        cmd->add_option("--config", opt.config_path, "problem config file");
        cmd->add_option("--quad", opt.quad, "octahedral | product");
        cmd->add_option("--order-n", opt.order_n, "quadrature order N");
        cmd->add_option("--delta", opt.delta, "rotation strength");
        cmd->add_option("--schedule", opt.schedule,
                        "none | random_each_step | forth_and_back | double_half_step");
        cmd->add_option("--spatial-order", opt.spatial_order)->check(CLI::Range(1, 2));
        cmd->add_option("--cfl", opt.cfl);
        cmd->add_option("--seed", opt.seed);
        cmd->add_flag("--conserve", opt.conserve, "conservative rescale after interpolation");
        cmd->add_option("--out", opt.out_dir, "output directory");
        cmd->add_option("--cells", opt.cells, "override grid resolution (nx = ny)");
        cmd->add_option("--t-end", opt.t_end, "override end time");
    };

    auto* run = app.add_subcommand("run", "run one simulation and write artifacts");
    add_run_options(run);
    run->add_option("--snapshots", opt.snapshots, "density snapshot times")->delimiter(',');

    auto* verify = app.add_subcommand("verify", "run the property suites");
    std::uint64_t verify_seed = 42;
    verify->add_option("--seed", verify_seed);

    auto* sweep = app.add_subcommand("sweep", "metric grid over delta and quadrature order");
    add_run_options(sweep);
    std::vector<double> deltas{0.0, 4.0, 8.0};
    std::vector<int> orders{4, 6, 8, 10};
    std::vector<int> product_orders;
    sweep->add_option("--deltas", deltas, "rotation strengths")->delimiter(',');
    sweep->add_option("--orders", orders, "octahedral orders N")->delimiter(',');
    sweep->add_option("--product-orders", product_orders, "plain S_N product orders")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    try {
        if (quad_table->parsed()) return cmd_quad_table(max_n, points_csv, csv_order);
        if (run->parsed()) return cmd_run(opt);
        if (verify->parsed()) return cmd_verify(verify_seed);
        if (sweep->parsed()) return cmd_sweep(opt, deltas, orders, product_orders);
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
    return 0;
}
