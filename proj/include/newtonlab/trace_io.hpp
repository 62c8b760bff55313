#pragma once

/// JSON-lines trace format and JSON report serialization.
///
/// A trace file is one header object {problem, solver, config}, one object
/// per iteration record, and a trailer object {status, final_x, iterations,
/// detail}. Scalars are written in shortest round-trip decimal form, so a
/// parsed trace reproduces the solver's doubles bit for bit and identical
/// runs produce byte-identical files.

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "newtonlab/analysis.hpp"
#include "newtonlab/errors.hpp"
#include "newtonlab/solvers.hpp"

namespace newtonlab {

using json = nlohmann::json;

inline json to_json(const SolverConfig& cfg) {
    json j{{"epsilon", cfg.epsilon},
           {"max_iterations", cfg.max_iterations},
           {"armijo_alpha", cfg.armijo_alpha},
           {"backtrack_rho", cfg.backtrack_rho},
           {"min_step", cfg.min_step},
           {"oscillation_window", cfg.oscillation_window}};
    j["m"] = cfg.m ? json(*cfg.m) : json(nullptr);
    j["L"] = cfg.L ? json(*cfg.L) : json(nullptr);
    return j;
}

inline SolverConfig solver_config_from_json(const json& j) {
    SolverConfig cfg;
    cfg.epsilon = j.at("epsilon").get<double>();
    cfg.max_iterations = j.at("max_iterations").get<int>();
    cfg.armijo_alpha = j.at("armijo_alpha").get<double>();
    cfg.backtrack_rho = j.at("backtrack_rho").get<double>();
    cfg.min_step = j.at("min_step").get<double>();
    cfg.oscillation_window = j.at("oscillation_window").get<int>();
    if (j.contains("m") && !j.at("m").is_null()) cfg.m = j.at("m").get<double>();
    if (j.contains("L") && !j.at("L").is_null()) cfg.L = j.at("L").get<double>();
    return cfg;
}

inline json to_json(const IterationRecord& r) {
    return json{{"index", r.index},
                {"x", r.x},
                {"f", r.f},
                {"grad_norm", r.grad_norm},
                {"decrement", r.decrement},
                {"direction_norm", r.direction_norm},
                {"step_length", r.step_length},
                {"full_step_accepted", r.full_step_accepted},
                {"f_decrease", r.f_decrease}};
}

inline IterationRecord iteration_record_from_json(const json& j) {
    IterationRecord r;
    r.index = j.at("index").get<int>();
    r.x = j.at("x").get<Vector>();
    r.f = j.at("f").get<double>();
    r.grad_norm = j.at("grad_norm").get<double>();
    r.decrement = j.at("decrement").get<double>();
    r.direction_norm = j.at("direction_norm").get<double>();
    r.step_length = j.at("step_length").get<double>();
    r.full_step_accepted = j.at("full_step_accepted").get<bool>();
    r.f_decrease = j.at("f_decrease").get<double>();
    return r;
}

inline void write_trace(std::ostream& out, const SolveResult& result) {
    const json header{{"problem", result.trace.problem},
                      {"solver", result.trace.solver},
                      {"config", to_json(result.trace.config)}};
    out << header.dump() << '\n';
    for (const IterationRecord& r : result.trace.records) out << to_json(r).dump() << '\n';
    const json trailer{{"status", to_string(result.status)},
                       {"final_x", result.final_x},
                       {"iterations", result.trace.records.empty()
                                          ? 0
                                          : static_cast<int>(result.trace.records.size()) - 1},
                       {"detail", result.status_detail}};
    out << trailer.dump() << '\n';
}

inline SolveResult read_trace(std::istream& in) {
    SolveResult result;
    std::string line;
    bool have_header = false;
    bool have_trailer = false;
    try {
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            if (!have_header) {
                result.trace.problem = j.at("problem").get<std::string>();
                result.trace.solver = j.at("solver").get<std::string>();
                result.trace.config = solver_config_from_json(j.at("config"));
                have_header = true;
            } else if (j.contains("status")) {
                result.status = solve_status_from_string(j.at("status").get<std::string>());
                result.final_x = j.at("final_x").get<Vector>();
                result.status_detail = j.value("detail", std::string{});
                have_trailer = true;
            } else {
                result.trace.records.push_back(iteration_record_from_json(j));
            }
        }
    } catch (const json::exception& e) {
        throw Error(std::string("malformed trace: ") + e.what());
    }
    if (!have_header || !have_trailer) throw Error("malformed trace: missing header or trailer");
    return result;
}

inline json to_json(const RegionReport& r) {
    json j{{"m", r.m},
           {"M", r.M},
           {"L", r.L},
           {"f_gap", r.f_gap},
           {"r0", r.r0},
           {"regularized_radius", r.regularized_radius},
           {"m0", r.m0},
           {"drnm_bound", r.drnm_bound}};
    if (r.newton_radius) {
        j["newton_radius"] = *r.newton_radius;
        j["dnm_bound"] = r.dnm_bound;
    } else {
        j["newton_radius"] = nullptr;
        j["dnm_bound"] = nullptr;
        j["notes"] = json::array({"Newton exact on quadratics: M = 0 leaves the Newton area "
                                  "and the damped-Newton bound undefined"});
    }
    return j;
}

inline json to_json(const AuditReport& r) {
    json violations = json::array();
    for (const AuditViolation& v : r.violations)
        violations.push_back(json{{"index", v.index},
                                  {"check", v.check},
                                  {"observed_decrease", v.lhs},
                                  {"required_bound", v.rhs}});
    return json{{"variant", r.variant},
                {"steps_audited", r.steps_audited},
                {"distance_checks", r.distance_checks},
                {"violations", violations},
                {"pass", r.pass()}};
}

}  // namespace newtonlab
