#include "commands.hpp"

#include "waveapost/io.hpp"

#include <fstream>
#include <ostream>

namespace waveapost::cli {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    return os;
}

void dump(const Trajectory& traj, const DumpOptions& dumps) {
    if (dumps.mesh) {
        auto os = open_output(*dumps.mesh);
        for (int n = 0; n <= traj.steps(); ++n) {
            if (n > 0 && traj[n].mesh() == traj[n - 1].mesh()) continue;
            os << "# step " << n << '\n';
            write_mesh(os, traj[n].mesh());
        }
    }
    if (dumps.trajectory) {
        auto os = open_output(*dumps.trajectory);
        write_trajectory(os, traj);
    }
    if (dumps.matrix) {
        auto os = open_output(*dumps.matrix);
        const FeSpace& space = traj[0].space;
        os << "# mass\n";
        write_matrix(os, space.mass());
        os << "# stiffness\n";
        write_matrix(os, assemble_stiffness(space, traj.problem.a));
    }
}

}  // namespace

int cmd_run(const RunConfig& cfg, const DumpOptions& dumps, std::ostream& out) {
    const Mesh mesh = uniform_mesh(cfg.problem.domain, cfg.n);
    const TimeGrid grid = TimeGrid::uniform(cfg.problem.final_time, cfg.steps);
    const Trajectory traj = run(cfg.problem, grid, mesh, cfg.schedule_for(grid), cfg.stepper);
    dump(traj, dumps);

    std::vector<ConvergenceRow> rows(1);
    rows[0].h = mesh.max_diameter();
    rows[0].k = grid.max_step();
    if (cfg.problem.has_exact()) rows[0].error = exact_error_linf_l2(traj, cfg.problem.exact_u);
    rows[0].bound = total_bound(traj, cfg.estimator);
    fill_orders(rows);

    if (cfg.csv_path) {
        auto os = open_output(*cfg.csv_path);
        write_convergence_csv(os, rows);
    } else {
        write_convergence_csv(out, rows);
    }
    if (cfg.breakdown_path) {
        auto os = open_output(*cfg.breakdown_path);
        write_breakdown_csv(os, rows[0].bound);
    } else {
        out << '\n';
        write_breakdown_csv(out, rows[0].bound);
    }
    if (cfg.element_map_path) {
        auto os = open_output(*cfg.element_map_path);
        write_element_map(os, rows[0].bound);
    }
    return kOk;
}

int cmd_convergence(const RunConfig& cfg, int levels, std::ostream& out, std::ostream& err) {
    if (levels < 2) throw ConfigError("--levels must be at least 2");
    StudySettings s;
    s.base_n = cfg.n;
    s.base_steps = cfg.steps;
    s.levels = levels;
    s.stepper = cfg.stepper;
    s.estimator = cfg.estimator;
    if (!cfg.schedule.empty()) s.schedule = [&cfg](const TimeGrid& grid) { return cfg.schedule_for(grid); };
    const auto rows = convergence_study(cfg.problem, s);
    if (cfg.csv_path) {
        auto os = open_output(*cfg.csv_path);
        write_convergence_csv(os, rows);
    } else {
        write_convergence_csv(out, rows);
    }
    for (const auto& r : rows)
        if (r.effectivity && *r.effectivity < 1.0)
            err << "note: level " << r.level << " has total < error (effectivity " << *r.effectivity
                << "); increase C_el\n";
    return kOk;
}

int cmd_check(const CheckOptions& options, std::ostream& out) {
    const auto results = run_checks(options, out);
    if (results.empty()) {
        out << "no check matches filter '" << options.filter << "'\n";
        return kCheckFailed;
    }
    std::size_t failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    out << results.size() - failed << "/" << results.size() << " checks passed\n";
    return failed ? kCheckFailed : kOk;
}

int guarded(const std::function<int()>& body, std::ostream& err) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ExpressionError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << '\n';
        return kSolverError;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kSolverError;
    }
}

}  // namespace waveapost::cli
