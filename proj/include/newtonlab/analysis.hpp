#pragma once

/// Closed-form convergence-area radii and complexity bounds, per-step
/// inequality audits over executable traces, convergence-rate classification,
/// 1D basin maps, and the affine-invariance check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "newtonlab/errors.hpp"
#include "newtonlab/linalg.hpp"
#include "newtonlab/oracle.hpp"
#include "newtonlab/problems.hpp"
#include "newtonlab/solvers.hpp"

namespace newtonlab {

struct RegionReport {
    // inputs echo
    double m = 0.0;
    double M = 0.0;
    double L = 0.0;
    double f_gap = 0.0;
    double r0 = 0.0;
    // derived quantities
    std::optional<double> newton_radius;  // 2m/(3M); absent for quadratics (M = 0)
    double regularized_radius = 0.0;      // 2m/(3(M+2L))
    double m0 = 0.0;                      // m(M/3 + 2L)/(M + 2L)
    double dnm_bound = 0.0;               // 9 L^2 M^2 f_gap / m^5 (0 when M = 0)
    double drnm_bound = 0.0;              // 13.5 L^2 (M+2L)^3 (1+r0) f_gap / (m0 m)^3
};

/// Convergence-area radii and worst-case step counts for reaching them.
inline RegionReport region_report(double m, double M, double L, double f_gap, double r0) {
    if (!(m > 0.0)) throw InvalidConstants("m must be positive");
    if (!(M >= 0.0)) throw InvalidConstants("M must be non-negative");
    // L = 0 is allowed for Newton-area-only queries; a positive L is a
    // Hessian norm bound and cannot sit below m.
    if (!(L >= 0.0) || (L > 0.0 && L < m)) throw InvalidConstants("need L = 0 or L >= m");
    if (!(f_gap >= 0.0)) throw InvalidConstants("f_gap must be non-negative");
    if (!(r0 >= 0.0)) throw InvalidConstants("r0 must be non-negative");

    RegionReport r;
    r.m = m;
    r.M = M;
    r.L = L;
    r.f_gap = f_gap;
    r.r0 = r0;
    if (M > 0.0) r.newton_radius = 2.0 * m / (3.0 * M);
    r.regularized_radius = 2.0 * m / (3.0 * (M + 2.0 * L));
    r.m0 = m * (M / 3.0 + 2.0 * L) / (M + 2.0 * L);
    r.dnm_bound = 9.0 * L * L * M * M * f_gap / std::pow(m, 5);
    r.drnm_bound =
        13.5 * L * L * std::pow(M + 2.0 * L, 3) * (1.0 + r0) * f_gap / std::pow(r.m0 * m, 3);
    return r;
}

struct RateClassification {
    enum class Verdict { exact, cubic, quadratic, linear, inconclusive };
    struct StepRatios {
        double linear;     // dist_{s+1} / dist_s
        double quadratic;  // dist_{s+1} / dist_s^2
        double cubic;      // dist_{s+1} / dist_s^3
    };
    std::vector<StepRatios> ratios;  // one per step where both distances clear the noise floor
    Verdict verdict = Verdict::inconclusive;
};

inline std::string to_string(RateClassification::Verdict v) {
    switch (v) {
        case RateClassification::Verdict::exact: return "exact";
        case RateClassification::Verdict::cubic: return "cubic";
        case RateClassification::Verdict::quadratic: return "quadratic";
        case RateClassification::Verdict::linear: return "linear";
        case RateClassification::Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

namespace detail {

/// Distances below this are roundoff, not convergence data.
constexpr double kRateNoiseFloor = 1e-13;

/// All values within 20% of their median.
inline bool stable_ratios(const std::vector<double>& r) {
    if (r.size() < 3) return false;
    std::vector<double> sorted = r;
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[sorted.size() / 2];
    if (!(med > 0.0)) return false;
    for (double v : r)
        if (v < 0.8 * med || v > 1.2 * med) return false;
    return true;
}

inline double median_of(std::vector<double> r) {
    std::sort(r.begin(), r.end());
    return r[r.size() / 2];
}

}  // namespace detail

/// Classifies the empirical convergence rate of a trace toward a known
/// minimizer from the stability of its per-step distance ratios.
inline RateClassification classify_rate(const Trace& trace, std::span<const double> x_star) {
    if (trace.records.empty()) throw Error("classify_rate requires a nonempty trace");
    if (!all_finite(x_star)) throw InvalidConstants("x_star must be finite");

    std::vector<double> dist;
    dist.reserve(trace.records.size());
    for (const IterationRecord& rec : trace.records)
        dist.push_back(norm2(subtracted(rec.x, x_star)));

    RateClassification rc;
    const std::size_t steps = trace.records.size() - 1;
    if (steps <= 1 && dist.back() <= 1e-10 * (1.0 + norm2(x_star))) {
        rc.verdict = RateClassification::Verdict::exact;
        return rc;
    }

    std::vector<double> lin, quad, cub;
    for (std::size_t s = 0; s + 1 < dist.size(); ++s) {
        if (dist[s] <= detail::kRateNoiseFloor || dist[s + 1] <= detail::kRateNoiseFloor) continue;
        const double l = dist[s + 1] / dist[s];
        rc.ratios.push_back({l, dist[s + 1] / (dist[s] * dist[s]),
                             dist[s + 1] / (dist[s] * dist[s] * dist[s])});
        lin.push_back(l);
        quad.push_back(rc.ratios.back().quadratic);
        cub.push_back(rc.ratios.back().cubic);
    }

    // Any convergence verdict requires actual contraction; a stationary
    // cycle has every ratio family constant and proves nothing.
    const bool contracting = !lin.empty() && detail::median_of(lin) < 1.0;
    if (contracting && detail::stable_ratios(cub))
        rc.verdict = RateClassification::Verdict::cubic;
    else if (contracting && detail::stable_ratios(quad))
        rc.verdict = RateClassification::Verdict::quadratic;
    else if (contracting && detail::stable_ratios(lin))
        rc.verdict = RateClassification::Verdict::linear;
    else
        rc.verdict = RateClassification::Verdict::inconclusive;
    return rc;
}

enum class AuditVariant { dnm, drnm };

inline std::string to_string(AuditVariant v) {
    return v == AuditVariant::dnm ? "dnm" : "drnm";
}

struct AuditViolation {
    int index;          // record index whose arriving step failed the bound
    std::string check;  // "decrement-decrease" or "distance-decrease"
    double lhs;         // observed decrease
    double rhs;         // required lower bound (slack already subtracted)
};

struct AuditReport {
    std::string variant;
    int steps_audited = 0;
    int distance_checks = 0;  // distance-based checks applied (x* known)
    std::vector<AuditViolation> violations;
    bool pass() const { return violations.empty(); }
};

struct AuditInputs {
    double m = 0.0;
    double L = 0.0;
    std::optional<double> M;        // enables restricting the distance check to outside the Newton area
    std::optional<Vector> x_star;   // enables the distance-based check
};

/// Audits a damped-scheme trace against its per-step decrease guarantees:
/// f-decrease >= (m/4L) * decrement^2 for the fixed-step damped scheme,
/// f-decrease >= t/2 * decrement^2 for the damped regularized scheme, and,
/// when the minimizer is known, f-decrease >= (m^3/4L^2) ||x - x*||^2
/// (outside the Newton area if M is supplied, everywhere otherwise).
/// Slack: 1e-12 on the decrement bounds, 1e-10 on the distance bound.
inline AuditReport audit_decrease(const Trace& trace, AuditVariant variant,
                                  const AuditInputs& in) {
    if (!(in.m > 0.0) || !(in.L >= in.m))
        throw InvalidConstants("audit requires 0 < m <= L");
    const std::string expected = to_string(variant);
    if (trace.solver != expected)
        throw VariantMismatch("trace was produced by solver '" + trace.solver +
                              "', audit variant is '" + expected + "'");

    AuditReport report;
    report.variant = expected;

    std::optional<double> area_radius;
    if (in.M && *in.M > 0.0) area_radius = 2.0 * in.m / (3.0 * *in.M);

    for (std::size_t s = 1; s < trace.records.size(); ++s) {
        const IterationRecord& prev = trace.records[s - 1];
        const IterationRecord& rec = trace.records[s];
        const double dec_sq = prev.decrement * prev.decrement;
        ++report.steps_audited;

        const double bound = variant == AuditVariant::dnm
                                 ? 0.25 * (in.m / in.L) * dec_sq
                                 : 0.5 * rec.step_length * dec_sq;
        if (rec.f_decrease < bound - 1e-12)
            report.violations.push_back({rec.index, "decrement-decrease", rec.f_decrease,
                                         bound - 1e-12});

        if (variant == AuditVariant::dnm && in.x_star) {
            const double d = norm2(subtracted(prev.x, *in.x_star));
            if (!area_radius || d >= *area_radius) {
                ++report.distance_checks;
                const double dbound = std::pow(in.m, 3) / (4.0 * in.L * in.L) * d * d;
                if (rec.f_decrease < dbound - 1e-10)
                    report.violations.push_back({rec.index, "distance-decrease", rec.f_decrease,
                                                 dbound - 1e-10});
            }
        }
    }
    return report;
}

struct BasinCell {
    enum class Outcome { converged, oscillating, diverged, budget };
    double start = 0.0;
    Outcome outcome = Outcome::diverged;
    int iterations = 0;
};

inline std::string to_string(BasinCell::Outcome o) {
    switch (o) {
        case BasinCell::Outcome::converged: return "converged";
        case BasinCell::Outcome::oscillating: return "oscillating";
        case BasinCell::Outcome::diverged: return "diverged";
        case BasinCell::Outcome::budget: return "budget";
    }
    return "diverged";
}

namespace detail {

/// A run counts as converged-to-target only if it stopped near the declared
/// target; landing on a different attractor is an escape from this basin.
constexpr double kBasinTargetTol = 1e-3;

inline BasinCell::Outcome basin_outcome(const SolveResult& r,
                                        const std::optional<Vector>& target) {
    switch (r.status) {
        case SolveStatus::converged:
            if (target && norm2(subtracted(r.final_x, *target)) > kBasinTargetTol)
                return BasinCell::Outcome::diverged;
            return BasinCell::Outcome::converged;
        case SolveStatus::oscillating: return BasinCell::Outcome::oscillating;
        case SolveStatus::max_iterations: return BasinCell::Outcome::budget;
        case SolveStatus::diverged:
        case SolveStatus::error: return BasinCell::Outcome::diverged;
    }
    return BasinCell::Outcome::diverged;
}

}  // namespace detail

/// Sweeps a 1D problem over a uniform grid of starting points and classifies
/// each run. Grid points are lo + i (hi-lo)/(count-1); the exact oscillation
/// boundaries of a problem are excluded unless include_boundary appends them.
/// Cells are independent and the sweep is deterministic.
inline std::vector<BasinCell> basin_map_1d(const ProblemInstance& problem, SolverKind method,
                                           double t_lo, double t_hi, int grid_count,
                                           const SolverConfig& cfg,
                                           bool include_boundary = false) {
    if (problem.oracle.dimension != 1)
        throw UnsupportedProblem("basin maps require a 1D problem");
    if (grid_count < 2) throw InvalidConfig("basin grid needs at least 2 points");
    if (!(t_lo < t_hi)) throw InvalidConfig("basin grid needs t_lo < t_hi");

    std::vector<double> starts;
    starts.reserve(static_cast<std::size_t>(grid_count) + problem.basin_boundaries.size());
    for (int i = 0; i < grid_count; ++i)
        starts.push_back(t_lo + (t_hi - t_lo) * i / (grid_count - 1));
    if (include_boundary)
        for (double b : problem.basin_boundaries) starts.push_back(b);

    std::optional<Vector> target;
    if (problem.oracle.constants && problem.oracle.constants->minimizer)
        target = problem.oracle.constants->minimizer;

    std::vector<BasinCell> cells;
    cells.reserve(starts.size());
    for (double t : starts) {
        const Vector x0{t};
        const SolveResult r = run_solver(method, problem, x0, cfg);
        const int steps = r.trace.records.empty()
                              ? 0
                              : static_cast<int>(r.trace.records.size()) - 1;
        cells.push_back({t, detail::basin_outcome(r, target), steps});
    }
    return cells;
}

/// phi(y) = f(A y) with the chain-rule gradient and Hessian.
inline ObjectiveOracle transformed_oracle(const ObjectiveOracle& oracle, const DenseMatrix& a) {
    if (a.order() != oracle.dimension) throw DimensionMismatch(oracle.dimension, a.order());
    ObjectiveOracle t;
    t.dimension = oracle.dimension;
    const auto base = std::make_shared<ObjectiveOracle>(oracle);
    const auto mat = std::make_shared<DenseMatrix>(a);
    t.value = [base, mat](std::span<const double> y) { return base->value(mat->apply(y)); };
    t.gradient = [base, mat](std::span<const double> y) {
        return mat->apply_transposed(base->gradient(mat->apply(y)));
    };
    t.hessian = [base, mat](std::span<const double> y) {
        const std::size_t n = mat->order();
        const SymmetricMatrix h = base->hessian(mat->apply(y));
        DenseMatrix ha(n);  // H * A
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) s += h(i, k) * (*mat)(k, j);
                ha(i, j) = s;
            }
        SymmetricMatrix out(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) s += (*mat)(k, i) * ha(k, j);
                out.set(i, j, s);
            }
        return out;
    };
    return t;
}

/// Runs the classical Newton sequence on f from x0 and on phi(y) = f(Ay)
/// from A^{-1} x0, and returns the largest gap max_s ||y_s - A^{-1} x_s||
/// over the first `steps` steps. In exact arithmetic the gap is zero.
inline double affine_invariance_check(const ObjectiveOracle& oracle, const DenseMatrix& a,
                                      std::span<const double> x0, int steps) {
    if (x0.size() != oracle.dimension) throw DimensionMismatch(oracle.dimension, x0.size());
    const LuFactorization lu(a);
    const ObjectiveOracle phi = transformed_oracle(oracle, a);

    Vector x(x0.begin(), x0.end());
    Vector y = lu.solve(x);
    double deviation = 0.0;  // y_0 is A^{-1} x_0 by construction

    for (int s = 0; s < steps; ++s) {
        const Evaluation ex = evaluate(oracle, x);
        x = stepped(x, 1.0, detail::solve_newton_system(ex.hess, ex.grad).direction);
        const Evaluation ey = evaluate(phi, y);
        y = stepped(y, 1.0, detail::solve_newton_system(ey.hess, ey.grad).direction);
        deviation = std::max(deviation, norm2(subtracted(y, lu.solve(x))));
    }
    return deviation;
}

/// Radius of the smallest ball around the declared minimizer containing the
/// sublevel set {f <= f(x0)}: found by radial bisection in one or two
/// dimensions, and by the conservative strong-convexity bound
/// sqrt(2 (f(x0)-f*) / m) above that.
inline double sublevel_radius(const ObjectiveOracle& oracle, std::span<const double> x0) {
    if (!oracle.constants || !oracle.constants->minimizer)
        throw MissingConstants("sublevel radius needs a declared minimizer");
    const Vector& xs = *oracle.constants->minimizer;
    if (xs.size() != x0.size()) throw DimensionMismatch(xs.size(), x0.size());

    const double f0 = oracle.value(x0);
    const double fs = oracle.constants->min_value ? *oracle.constants->min_value
                                                  : oracle.value(xs);
    if (!(f0 > fs)) return 0.0;

    const std::size_t n = oracle.dimension;
    if (n > 2) {
        if (!oracle.constants->m)
            throw MissingConstants("sublevel radius above 2D needs the strong-convexity constant");
        return std::sqrt(2.0 * (f0 - fs) / *oracle.constants->m);
    }

    auto boundary_radius = [&](double ux, double uy) {
        auto value_at = [&](double r) {
            Vector p(xs);
            p[0] += r * ux;
            if (n == 2) p[1] += r * uy;
            return oracle.value(p);
        };
        double hi = 1.0;
        int guard = 0;
        while (value_at(hi) <= f0) {
            hi *= 2.0;
            if (++guard > 120) throw Error("sublevel set appears unbounded along a ray");
        }
        double lo = 0.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (value_at(mid) <= f0 ? lo : hi) = mid;
        }
        return hi;
    };

    if (n == 1) return std::max(boundary_radius(1.0, 0.0), boundary_radius(-1.0, 0.0));

    double best = 0.0;
    constexpr int kDirections = 64;
    for (int k = 0; k < kDirections; ++k) {
        const double theta = 2.0 * 3.14159265358979323846 * k / kDirections;
        best = std::max(best, boundary_radius(std::cos(theta), std::sin(theta)));
    }
    return best;
}

}  // namespace newtonlab
