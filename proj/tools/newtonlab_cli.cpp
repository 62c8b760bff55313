// Command-line front end: run solvers, sweep 1D basins, emit region reports,
// and audit traces against their per-step decrease guarantees.
//
// Exit codes follow sysexits where it matters to scripts: 64 usage, 65
// unknown problem or malformed trace, 66 missing constants. `run` maps the
// solve status to 0 converged / 2 oscillating-or-diverged / 3 budget
// exhausted / 4 solver error; `audit` exits 1 when violations were found.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "newtonlab/newtonlab.hpp"
#include "newtonlab/trace_io.hpp"

namespace {

using namespace newtonlab;

constexpr int kExitUsage = 64;
constexpr int kExitUnknownInput = 65;
constexpr int kExitMissingConstants = 66;

Vector parse_vector(const std::string& s) {
    Vector v;
    for (const std::string& part : detail::split(s, ',')) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(part, &used);
        } catch (const std::exception&) {
            throw InvalidConfig("bad vector literal '" + s + "'");
        }
        if (used != part.size()) throw InvalidConfig("bad vector literal '" + s + "'");
        v.push_back(x);
    }
    if (v.empty()) throw InvalidConfig("empty vector literal");
    return v;
}

SolverConfig config_with_overrides(const std::vector<std::string>& sets) {
    SolverConfig cfg;
    for (const std::string& kv : sets) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) throw InvalidConfig("--set expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        double num = 0.0;
        std::size_t used = 0;
        try {
            num = std::stod(value, &used);
        } catch (const std::exception&) {
            throw InvalidConfig("bad numeric value in --set " + kv);
        }
        if (used != value.size()) throw InvalidConfig("bad numeric value in --set " + kv);

        if (key == "epsilon") cfg.epsilon = num;
        else if (key == "max_iterations") cfg.max_iterations = static_cast<int>(num);
        else if (key == "m") cfg.m = num;
        else if (key == "L") cfg.L = num;
        else if (key == "armijo_alpha") cfg.armijo_alpha = num;
        else if (key == "backtrack_rho") cfg.backtrack_rho = num;
        else if (key == "min_step") cfg.min_step = num;
        else if (key == "oscillation_window") cfg.oscillation_window = static_cast<int>(num);
        else throw InvalidConfig("unknown config key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

/// Writes to the path when given, stdout otherwise.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file '" + path + "'");
    fn(out);
}

int cmd_problems() {
    for (const ProblemInstance& p : builtin_problems()) {
        std::cout << p.name;
        if (!p.tags.empty()) {
            std::cout << "  [";
            for (std::size_t i = 0; i < p.tags.size(); ++i)
                std::cout << (i ? " " : "") << p.tags[i];
            std::cout << "]";
        }
        std::cout << '\n';
    }
    return 0;
}

int cmd_run(const std::string& problem_name, const std::string& solver_name,
            const std::string& start, const std::vector<std::string>& sets,
            const std::string& output) {
    const ProblemInstance problem = problem_from_name(problem_name);
    const SolverKind kind = solver_kind_from_string(solver_name);
    const Vector x0 = parse_vector(start);
    const SolverConfig cfg = config_with_overrides(sets);

    const SolveResult result = run_solver(kind, problem, x0, cfg);
    with_output(output, [&](std::ostream& out) { write_trace(out, result); });

    switch (result.status) {
        case SolveStatus::converged: return 0;
        case SolveStatus::oscillating:
        case SolveStatus::diverged: return 2;
        case SolveStatus::max_iterations: return 3;
        case SolveStatus::error:
            std::cerr << "solver error: " << result.status_detail << '\n';
            return 4;
    }
    return 4;
}

int cmd_basin(const std::string& problem_name, const std::string& solver_name, double lo,
              double hi, int count, bool include_boundary,
              const std::vector<std::string>& sets, const std::string& output) {
    const ProblemInstance problem = problem_from_name(problem_name);
    const SolverKind kind = solver_kind_from_string(solver_name);
    const SolverConfig cfg = config_with_overrides(sets);

    const std::vector<BasinCell> cells =
        basin_map_1d(problem, kind, lo, hi, count, cfg, include_boundary);
    with_output(output, [&](std::ostream& out) {
        out << "start,outcome,iterations\n";
        for (const BasinCell& c : cells) {
            out << json(c.start).dump() << ',' << to_string(c.outcome) << ',' << c.iterations
                << '\n';
        }
    });
    return 0;
}

int cmd_report(const std::string& problem_name, const std::string& start,
               std::optional<double> f_gap_override) {
    const ProblemInstance problem = problem_from_name(problem_name);
    if (!problem.oracle.constants)
        throw MissingConstants("problem '" + problem.name + "' declares no analytic constants");
    const AnalyticConstants& c = *problem.oracle.constants;
    if (!c.m || !c.M || !c.L)
        throw MissingConstants("region report needs m, M, and L for '" + problem.name + "'");

    Vector x0;
    if (!start.empty()) {
        x0 = parse_vector(start);
        if (x0.size() != problem.oracle.dimension)
            throw InvalidConfig("--start dimension does not match the problem");
    } else {
        x0.assign(problem.oracle.dimension, 1.0);
    }

    double f_gap = 0.0;
    if (f_gap_override) {
        f_gap = *f_gap_override;
    } else {
        if (!c.min_value && !c.minimizer)
            throw MissingConstants("deriving the value gap needs the declared minimum");
        const double fstar = c.min_value ? *c.min_value : problem.oracle.value(*c.minimizer);
        f_gap = problem.oracle.value(x0) - fstar;
    }
    const double r0 = c.sublevel_radius ? *c.sublevel_radius
                                        : sublevel_radius(problem.oracle, x0);

    json j = to_json(region_report(*c.m, *c.M, *c.L, f_gap, r0));
    j["problem"] = problem.name;
    j["start"] = x0;
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_audit(const std::string& trace_path, const std::string& variant_name, double m, double L,
              std::optional<double> M, const std::string& x_star) {
    std::ifstream in(trace_path);
    if (!in) throw UnknownProblem("cannot open trace file '" + trace_path + "'");
    SolveResult result;
    try {
        result = read_trace(in);
    } catch (const Error& e) {
        throw UnknownProblem(e.what());  // malformed trace shares the bad-input exit code
    }

    AuditVariant variant;
    if (variant_name == "dnm") variant = AuditVariant::dnm;
    else if (variant_name == "drnm") variant = AuditVariant::drnm;
    else throw InvalidConfig("unknown audit variant '" + variant_name + "'");

    AuditInputs inputs;
    inputs.m = m;
    inputs.L = L;
    inputs.M = M;
    if (!x_star.empty()) inputs.x_star = parse_vector(x_star);

    const AuditReport report = audit_decrease(result.trace, variant, inputs);
    std::cout << to_json(report).dump(2) << '\n';
    return report.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Newton-family solvers with convergence-area analysis"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run a solver on a registry problem, writing a JSON-lines trace");
    std::string run_problem, run_solver_name, run_start, run_output;
    std::vector<std::string> run_sets;
    run->add_option("--problem", run_problem, "Registry problem name")->required();
    run->add_option("--solver", run_solver_name, "Solver")
        ->required()
        ->check(CLI::IsMember({"newton", "dnm", "dnm-bt", "rnm", "drnm", "newton-root"}));
    run->add_option("--start", run_start, "Starting point, comma-separated")->required();
    run->add_option("--set", run_sets, "Config override key=value (repeatable)");
    run->add_option("--output", run_output, "Trace file path (default stdout)");

    // basin
    auto* basin = app.add_subcommand("basin", "Map solver outcomes over a 1D grid of starts, as CSV");
    std::string basin_problem, basin_solver, basin_output;
    std::vector<std::string> basin_sets;
    double basin_lo = 0.0, basin_hi = 0.0;
    int basin_count = 0;
    bool basin_boundary = false;
    basin->add_option("problem", basin_problem, "Registry problem name")->required();
    basin->add_option("solver", basin_solver, "Solver")
        ->required()
        ->check(CLI::IsMember({"newton", "dnm", "dnm-bt", "rnm", "drnm", "newton-root"}));
    basin->add_option("lo", basin_lo, "Grid lower end")->required();
    basin->add_option("hi", basin_hi, "Grid upper end")->required();
    basin->add_option("count", basin_count, "Grid point count")->required();
    basin->add_flag("--include-boundary", basin_boundary,
                    "Also run the problem's exact oscillation boundary points");
    basin->add_option("--set", basin_sets, "Config override key=value (repeatable)");
    basin->add_option("--output", basin_output, "CSV file path (default stdout)");

    // report
    auto* report = app.add_subcommand("report", "Convergence-area radii and step bounds, as JSON");
    std::string report_problem, report_start;
    std::optional<double> report_f_gap;
    report->add_option("problem", report_problem, "Registry problem name")->required();
    report->add_option("--start", report_start, "Start deriving the value gap and r0 (default all-ones)");
    report->add_option("--f-gap", report_f_gap, "Override the value gap f(x0) - f*");

    // audit
    auto* audit = app.add_subcommand("audit", "Check a trace against its per-step decrease bounds");
    std::string audit_trace, audit_variant, audit_x_star;
    double audit_m = 0.0, audit_L = 0.0;
    std::optional<double> audit_M;
    audit->add_option("trace", audit_trace, "Trace file from `run`")->required();
    audit->add_option("--variant", audit_variant, "Audit variant: dnm or drnm")->required();
    audit->add_option("--m", audit_m, "Strong-convexity constant used by the run")->required();
    audit->add_option("--L", audit_L, "Gradient Lipschitz constant used by the run")->required();
    audit->add_option("--M", audit_M, "Hessian Lipschitz constant (restricts the distance check)");
    audit->add_option("--x-star", audit_x_star, "Known minimizer, comma-separated");

    // problems
    app.add_subcommand("problems", "List the built-in problem registry");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (app.got_subcommand("problems")) return cmd_problems();
        if (app.got_subcommand("run"))
            return cmd_run(run_problem, run_solver_name, run_start, run_sets, run_output);
        if (app.got_subcommand("basin"))
            return cmd_basin(basin_problem, basin_solver, basin_lo, basin_hi, basin_count,
                             basin_boundary, basin_sets, basin_output);
        if (app.got_subcommand("report"))
            return cmd_report(report_problem, report_start, report_f_gap);
        if (app.got_subcommand("audit"))
            return cmd_audit(audit_trace, audit_variant, audit_m, audit_L, audit_M, audit_x_star);
    } catch (const UnknownProblem& e) {
        std::cerr << e.what() << '\n';
        return kExitUnknownInput;
    } catch (const MissingConstants& e) {
        std::cerr << e.what() << '\n';
        return kExitMissingConstants;
    } catch (const VariantMismatch& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidConfig& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    } catch (const UnsupportedProblem& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    } catch (const DimensionMismatch& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return 4;
    }
    return kExitUsage;
}
