#pragma once

/// The iteration schemes: classical Newton (minimization and 1D root form),
/// damped Newton with a fixed fallback step or Armijo backtracking, pure
/// regularized Newton, and damped regularized Newton. Every solve returns a
/// full trace plus a termination status; iteration failures are recorded in
/// the status, never thrown past the result.

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "newtonlab/directions.hpp"
#include "newtonlab/errors.hpp"
#include "newtonlab/linalg.hpp"
#include "newtonlab/oracle.hpp"
#include "newtonlab/problems.hpp"

namespace newtonlab {

enum class SolveStatus { converged, oscillating, diverged, max_iterations, error };

inline std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::oscillating: return "oscillating";
        case SolveStatus::diverged: return "diverged";
        case SolveStatus::max_iterations: return "max-iterations";
        case SolveStatus::error: return "error";
    }
    return "error";
}

inline SolveStatus solve_status_from_string(const std::string& s) {
    if (s == "converged") return SolveStatus::converged;
    if (s == "oscillating") return SolveStatus::oscillating;
    if (s == "diverged") return SolveStatus::diverged;
    if (s == "max-iterations") return SolveStatus::max_iterations;
    if (s == "error") return SolveStatus::error;
    throw Error("unknown solve status: " + s);
}

enum class SolverKind { newton, dnm, dnm_bt, rnm, drnm, newton_root };

inline std::string to_string(SolverKind k) {
    switch (k) {
        case SolverKind::newton: return "newton";
        case SolverKind::dnm: return "dnm";
        case SolverKind::dnm_bt: return "dnm-bt";
        case SolverKind::rnm: return "rnm";
        case SolverKind::drnm: return "drnm";
        case SolverKind::newton_root: return "newton-root";
    }
    return "newton";
}

inline SolverKind solver_kind_from_string(const std::string& s) {
    if (s == "newton") return SolverKind::newton;
    if (s == "dnm") return SolverKind::dnm;
    if (s == "dnm-bt") return SolverKind::dnm_bt;
    if (s == "rnm") return SolverKind::rnm;
    if (s == "drnm") return SolverKind::drnm;
    if (s == "newton-root") return SolverKind::newton_root;
    throw Error("unknown solver: " + s);
}

struct SolverConfig {
    double epsilon = 1e-8;          // target accuracy; solvers stop at decrement <= epsilon^1.5
    int max_iterations = 200;
    std::optional<double> m;        // strong-convexity constant, for the fixed-step damped scheme
    std::optional<double> L;        // gradient Lipschitz constant, for fixed-step damping
    double armijo_alpha = 0.5;      // sufficient-decrease fraction, (0, 0.5]
    double backtrack_rho = 0.5;     // step shrink factor, (0, 1)
    double min_step = 1e-16;
    int oscillation_window = 8;     // how many past iterates the cycle detector compares

    void validate() const {
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidConfig("epsilon must be positive");
        if (max_iterations < 1) throw InvalidConfig("max_iterations must be at least 1");
        if (!(armijo_alpha > 0.0 && armijo_alpha <= 0.5))
            throw InvalidConfig("armijo_alpha must be in (0, 0.5]");
        if (!(backtrack_rho > 0.0 && backtrack_rho < 1.0))
            throw InvalidConfig("backtrack_rho must be in (0, 1)");
        if (!(min_step > 0.0)) throw InvalidConfig("min_step must be positive");
        if (oscillation_window < 1) throw InvalidConfig("oscillation_window must be at least 1");
        if (m && !(*m > 0.0)) throw InvalidConfig("m must be positive");
        if (L && !(*L > 0.0)) throw InvalidConfig("L must be positive");
    }
};

/// One completed solver step. The state fields (x, f, grad_norm, decrement)
/// describe the iterate this record landed on; the step fields
/// (direction_norm, step_length, full_step_accepted, f_decrease) describe
/// the step that produced it. Record 0 is the starting point with zeroed
/// step fields.
struct IterationRecord {
    int index = 0;
    Vector x;
    double f = 0.0;
    double grad_norm = 0.0;
    double decrement = 0.0;
    double direction_norm = 0.0;
    double step_length = 0.0;
    bool full_step_accepted = false;
    double f_decrease = 0.0;
};

struct Trace {
    std::string problem;  // filled by callers that know the registry name
    std::string solver;
    SolverConfig config;
    std::vector<IterationRecord> records;
};

struct SolveResult {
    SolveStatus status = SolveStatus::error;
    Vector final_x;
    Trace trace;
    std::string status_detail;
};

/// Largest t in {1, rho, rho^2, ...} satisfying the Armijo condition
/// line(t) <= line(0) + alpha * t * slope0. The optional allowance loosens
/// the full-step comparison only, for callers whose required decrease can
/// sit below the roundoff of the function values; shorter trial steps stay
/// strict so a broken oracle still underflows.
inline double armijo_backtrack(const std::function<double(double)>& line, double slope0,
                               const SolverConfig& cfg, double roundoff_allowance = 0.0) {
    if (!(slope0 < 0.0)) throw NonDescentDirection(slope0);
    const double f0 = line(0.0);
    double t = 1.0;
    while (!(line(t) <=
             f0 + cfg.armijo_alpha * t * slope0 + (t == 1.0 ? roundoff_allowance : 0.0))) {
        t *= cfg.backtrack_rho;
        if (t < cfg.min_step) throw StepUnderflow(t);
    }
    return t;
}

namespace detail {

constexpr double kDivergenceNorm = 1e12;
constexpr double kOscillationTol = 1e-9;

/// Near the optimum the sufficient-decrease tests ask for decreases smaller
/// than the resolution of f itself; comparisons get this much headroom so
/// the damped schemes cannot stall on sub-roundoff decreases.
inline double decrease_test_allowance(double f) {
    return 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f));
}

enum class Scheme { classical, dnm_fixed, dnm_backtracking, rnm, drnm };

inline std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::classical: return "newton";
        case Scheme::dnm_fixed: return "dnm";
        case Scheme::dnm_backtracking: return "dnm-bt";
        case Scheme::rnm: return "rnm";
        case Scheme::drnm: return "drnm";
    }
    return "newton";
}

struct PointState {
    double f = 0.0;
    Vector grad;
    double grad_norm = 0.0;
    Vector direction;
    double decrement_sq = 0.0;
    double decrement = 0.0;
};

inline PointState analyze_point(const ObjectiveOracle& oracle, std::span<const double> x,
                                bool regularized) {
    Evaluation e = evaluate(oracle, x);
    DirectionSolve ds = regularized ? solve_regularized_system(e.hess, e.grad)
                                    : solve_newton_system(e.hess, e.grad);
    PointState p;
    p.f = e.f;
    p.grad = std::move(e.grad);
    p.grad_norm = norm2(p.grad);
    p.direction = std::move(ds.direction);
    p.decrement_sq = ds.decrement_sq;
    p.decrement = std::sqrt(ds.decrement_sq);
    return p;
}

inline IterationRecord make_record(int index, const Vector& x, const PointState& p) {
    IterationRecord r;
    r.index = index;
    r.x = x;
    r.f = p.f;
    r.grad_norm = p.grad_norm;
    r.decrement = p.decrement;
    return r;
}

inline bool revisits(const std::deque<Vector>& window, const Vector& x) {
    for (const Vector& prev : window) {
        double diff = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            diff = std::max(diff, std::abs(x[i] - prev[i]));
        if (diff <= kOscillationTol) return true;
    }
    return false;
}

inline SolveResult run_scheme(const ObjectiveOracle& oracle, std::span<const double> x0,
                              const SolverConfig& cfg, Scheme scheme) {
    cfg.validate();
    if (x0.size() != oracle.dimension) throw DimensionMismatch(oracle.dimension, x0.size());

    SolveResult result;
    result.final_x.assign(x0.begin(), x0.end());
    result.trace.solver = scheme_name(scheme);
    result.trace.config = cfg;

    auto fail = [&result](const std::string& detail) {
        result.status = SolveStatus::error;
        result.status_detail = detail;
        return result;
    };

    if (scheme == Scheme::dnm_fixed) {
        if (!cfg.m || !cfg.L)
            return fail("missing-constants: fixed-step damped Newton requires m and L");
        if (!(*cfg.m > 0.0 && *cfg.m <= *cfg.L))
            return fail("invalid-constants: need 0 < m <= L");
        if (!(cfg.epsilon < (*cfg.m) * (*cfg.m) / *cfg.L))
            return fail("epsilon-too-large: need epsilon < m^2/L for a sound stopping rule");
    }
    if (scheme == Scheme::drnm && !cfg.L)
        return fail("missing-constants: damped regularized Newton requires L");

    const bool regularized = scheme == Scheme::rnm || scheme == Scheme::drnm;
    const bool detect_oscillation = scheme == Scheme::classical;
    const double stop = std::pow(cfg.epsilon, 1.5);

    Vector x(x0.begin(), x0.end());
    if (!all_finite(x) || norm2(x) > kDivergenceNorm) {
        result.status = SolveStatus::diverged;
        result.status_detail = "starting point outside the divergence guard";
        return result;
    }

    PointState cur;
    try {
        cur = analyze_point(oracle, x, regularized);
    } catch (const Error& err) {
        return fail(err.what());
    }
    result.trace.records.push_back(make_record(0, x, cur));
    if (cur.decrement <= stop) {
        result.status = SolveStatus::converged;
        return result;
    }

    std::deque<Vector> window;
    window.push_back(x);

    for (int s = 1; s <= cfg.max_iterations; ++s) {
        double t = 1.0;
        bool accepted = true;
        switch (scheme) {
            case Scheme::classical:
            case Scheme::rnm:
                break;
            case Scheme::dnm_fixed:
            case Scheme::drnm: {
                const Vector probe = stepped(x, 1.0, cur.direction);
                const double f_probe = oracle.value(probe);
                if (!(f_probe <=
                      cur.f - 0.5 * cur.decrement_sq + decrease_test_allowance(cur.f))) {
                    accepted = false;
                    t = scheme == Scheme::dnm_fixed ? *cfg.m / (2.0 * *cfg.L)
                                                    : cur.grad_norm / (2.0 * *cfg.L);
                }
                break;
            }
            case Scheme::dnm_backtracking: {
                auto line = [&](double tt) { return oracle.value(stepped(x, tt, cur.direction)); };
                try {
                    t = armijo_backtrack(line, -cur.decrement_sq, cfg,
                                         decrease_test_allowance(cur.f));
                } catch (const Error& err) {
                    return fail(err.what());
                }
                accepted = t == 1.0;
                break;
            }
        }

        Vector xn = stepped(x, t, cur.direction);
        result.final_x = xn;
        if (!all_finite(xn) || norm2(xn) > kDivergenceNorm) {
            result.status = SolveStatus::diverged;
            result.status_detail = "iterate norm exceeded the divergence guard";
            return result;
        }

        PointState nxt;
        try {
            nxt = analyze_point(oracle, xn, regularized);
        } catch (const OracleEvaluationError&) {
            result.status = SolveStatus::diverged;
            result.status_detail = "oracle produced non-finite values";
            return result;
        } catch (const Error& err) {
            return fail(err.what());
        }

        IterationRecord rec = make_record(s, xn, nxt);
        rec.direction_norm = norm2(cur.direction);
        rec.step_length = t;
        rec.full_step_accepted = accepted;
        rec.f_decrease = cur.f - nxt.f;
        result.trace.records.push_back(std::move(rec));

        if (nxt.decrement <= stop) {
            result.status = SolveStatus::converged;
            return result;
        }
        if (detect_oscillation && revisits(window, xn)) {
            result.status = SolveStatus::oscillating;
            result.status_detail = "iterate revisited a recent point";
            return result;
        }
        window.push_back(xn);
        while (window.size() > static_cast<std::size_t>(cfg.oscillation_window)) window.pop_front();

        x = std::move(xn);
        cur = std::move(nxt);
    }
    result.status = SolveStatus::max_iterations;
    return result;
}

}  // namespace detail

/// Classical Newton iteration x <- x - Hessian^{-1} gradient.
inline SolveResult classical_newton(const ObjectiveOracle& oracle, std::span<const double> x0,
                                    const SolverConfig& cfg) {
    return detail::run_scheme(oracle, x0, cfg, detail::Scheme::classical);
}

/// Damped Newton with the full-step acceptance test and fixed fallback step
/// m/(2L); requires cfg.m and cfg.L and epsilon < m^2/L.
inline SolveResult dnm_fixed(const ObjectiveOracle& oracle, std::span<const double> x0,
                             const SolverConfig& cfg) {
    return detail::run_scheme(oracle, x0, cfg, detail::Scheme::dnm_fixed);
}

/// Damped Newton with Armijo backtracking; needs no analytic constants.
inline SolveResult dnm_backtracking(const ObjectiveOracle& oracle, std::span<const double> x0,
                                    const SolverConfig& cfg) {
    return detail::run_scheme(oracle, x0, cfg, detail::Scheme::dnm_backtracking);
}

/// Pure regularized Newton: full steps along the regularized direction.
inline SolveResult rnm_pure(const ObjectiveOracle& oracle, std::span<const double> x0,
                            const SolverConfig& cfg) {
    return detail::run_scheme(oracle, x0, cfg, detail::Scheme::rnm);
}

/// Damped regularized Newton: full-step test, fallback step ||gradient||/(2L);
/// requires cfg.L.
inline SolveResult drnm(const ObjectiveOracle& oracle, std::span<const double> x0,
                        const SolverConfig& cfg) {
    return detail::run_scheme(oracle, x0, cfg, detail::Scheme::drnm);
}

/// A scalar function and its derivative, as consumed by the 1D root iteration.
struct ScalarRootFunction {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
};

/// Newton's iteration t <- t - g(t)/g'(t) for a root of g. Stops at
/// |g(t)| <= epsilon. Trace records store the residual in the f and
/// grad_norm fields and |residual| as the decrement.
inline SolveResult newton_root_1d(const ScalarRootFunction& fn, double t0,
                                  const SolverConfig& cfg) {
    cfg.validate();

    SolveResult result;
    result.trace.solver = "newton-root";
    result.trace.config = cfg;
    result.final_x = {t0};

    double t = t0;
    double g = fn.value(t);

    auto record_of = [](int index, double tt, double gg) {
        IterationRecord r;
        r.index = index;
        r.x = {tt};
        r.f = gg;
        r.grad_norm = std::abs(gg);
        r.decrement = std::abs(gg);
        return r;
    };

    if (!std::isfinite(g)) {
        result.status = SolveStatus::diverged;
        result.status_detail = "residual non-finite at the starting point";
        return result;
    }
    result.trace.records.push_back(record_of(0, t, g));
    if (std::abs(g) <= cfg.epsilon) {
        result.status = SolveStatus::converged;
        return result;
    }

    std::deque<Vector> window;
    window.push_back({t});

    for (int s = 1; s <= cfg.max_iterations; ++s) {
        const double gp = fn.derivative(t);
        if (gp == 0.0 || !std::isfinite(gp)) {
            result.status = SolveStatus::error;
            result.status_detail = "zero-derivative at iterate " + std::to_string(s - 1);
            return result;
        }
        const double d = -g / gp;
        const double tn = t + d;
        result.final_x = {tn};
        if (!std::isfinite(tn) || std::abs(tn) > detail::kDivergenceNorm) {
            result.status = SolveStatus::diverged;
            result.status_detail = "iterate magnitude exceeded the divergence guard";
            return result;
        }
        const double gn = fn.value(tn);
        if (!std::isfinite(gn)) {
            result.status = SolveStatus::diverged;
            result.status_detail = "residual non-finite";
            return result;
        }

        IterationRecord rec = record_of(s, tn, gn);
        rec.direction_norm = std::abs(d);
        rec.step_length = 1.0;
        rec.full_step_accepted = true;
        rec.f_decrease = g - gn;
        result.trace.records.push_back(std::move(rec));

        if (std::abs(gn) <= cfg.epsilon) {
            result.status = SolveStatus::converged;
            return result;
        }
        if (detail::revisits(window, {tn})) {
            result.status = SolveStatus::oscillating;
            result.status_detail = "iterate revisited a recent point";
            return result;
        }
        window.push_back({tn});
        while (window.size() > static_cast<std::size_t>(cfg.oscillation_window)) window.pop_front();

        t = tn;
        g = gn;
    }
    result.status = SolveStatus::max_iterations;
    return result;
}

/// The 1D root residual of a root-only problem (its stored gradient and
/// second derivative).
inline ScalarRootFunction residual_of(const ProblemInstance& problem) {
    if (problem.oracle.dimension != 1)
        throw UnsupportedProblem("root iteration needs a 1D problem");
    const auto o = std::make_shared<ObjectiveOracle>(problem.oracle);
    return {[o](double t) { return o->gradient(std::span<const double>(&t, 1))[0]; },
            [o](double t) { return o->hessian(std::span<const double>(&t, 1))(0, 0); }};
}

/// Runs the named solver on a registry problem, validating compatibility:
/// the root iteration only accepts root-residual problems and the
/// minimization solvers reject them.
inline SolveResult run_solver(SolverKind kind, const ProblemInstance& problem,
                              std::span<const double> x0, const SolverConfig& cfg) {
    // On a root residual, "newton" unambiguously means the root iteration.
    if (problem.root_only() && kind == SolverKind::newton) kind = SolverKind::newton_root;
    if (kind == SolverKind::newton_root) {
        if (!problem.root_only())
            throw UnsupportedProblem("newton-root only runs on root-residual problems");
        if (x0.size() != 1) throw DimensionMismatch(1, x0.size());
        SolveResult r = newton_root_1d(residual_of(problem), x0[0], cfg);
        r.trace.problem = problem.name;
        return r;
    }
    if (problem.root_only())
        throw UnsupportedProblem("problem '" + problem.name +
                                 "' is a root-finding residual, not a minimization objective");
    SolveResult r = [&] {
        switch (kind) {
            case SolverKind::newton: return classical_newton(problem.oracle, x0, cfg);
            case SolverKind::dnm: return dnm_fixed(problem.oracle, x0, cfg);
            case SolverKind::dnm_bt: return dnm_backtracking(problem.oracle, x0, cfg);
            case SolverKind::rnm: return rnm_pure(problem.oracle, x0, cfg);
            case SolverKind::drnm: return drnm(problem.oracle, x0, cfg);
            default: throw Error("unreachable solver kind");
        }
    }();
    r.trace.problem = problem.name;
    return r;
}

}  // namespace newtonlab
