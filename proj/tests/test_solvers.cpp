#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <thread>

#include "newtonlab/problems.hpp"
#include "newtonlab/solvers.hpp"
#include "test_support.hpp"

using namespace newtonlab;
using Catch::Approx;

namespace {

/// Sharp smoothed-V valley sqrt(t^2 + a^2): convex, with curvature collapsing
/// to ~a away from zero, so full regularized/Newton steps overshoot near the
/// kink and exercise the fallback branches.
ProblemInstance sharp_valley(double a) {
    ObjectiveOracle oracle;
    oracle.dimension = 1;
    oracle.value = [a](std::span<const double> x) { return std::sqrt(x[0] * x[0] + a * a); };
    oracle.gradient = [a](std::span<const double> x) {
        return Vector{x[0] / std::sqrt(x[0] * x[0] + a * a)};
    };
    oracle.hessian = [a](std::span<const double> x) {
        const double w = x[0] * x[0] + a * a;
        SymmetricMatrix h(1);
        h.set(0, 0, a * a / (w * std::sqrt(w)));
        return h;
    };
    return ProblemInstance{"sharp-valley", std::move(oracle), {}, 1.0, {}};
}

double example2_value(double t) { return std::sqrt(1.0 + t * t); }

}  // namespace

TEST_CASE("armijo backtracking accepts the full Newton step on a quadratic") {
    SolverConfig cfg;
    // f = t^2/2 from x = 1 along d = -1: slope -1, full step lands at the minimum.
    auto line = [](double t) { return 0.5 * (1.0 - t) * (1.0 - t); };
    REQUIRE(armijo_backtrack(line, -1.0, cfg) == 1.0);
}

TEST_CASE("armijo backtracking halves to the first admissible step") {
    SolverConfig cfg;  // alpha = rho = 0.5
    // f = t^2 from x = 1 along d = -4: slope0 = -8; trials 9 > -3, 1 > -1, 0 <= 0.
    auto line = [](double t) { return (1.0 - 4.0 * t) * (1.0 - 4.0 * t); };
    REQUIRE(armijo_backtrack(line, -8.0, cfg) == 0.25);
}

TEST_CASE("armijo backtracking rejects non-descent slopes") {
    SolverConfig cfg;
    auto line = [](double t) { return t; };
    REQUIRE_THROWS_AS(armijo_backtrack(line, 1.0, cfg), NonDescentDirection);
}

TEST_CASE("armijo backtracking reports underflow on a broken line") {
    SolverConfig cfg;
    auto flat = [](double) { return 0.0; };
    REQUIRE_THROWS_AS(armijo_backtrack(flat, -1.0, cfg), StepUnderflow);
}

TEST_CASE("root iteration converges inside the small basin") {
    const auto p = make_example1_root();
    SolverConfig cfg;
    const SolveResult r = newton_root_1d(residual_of(p), 0.5, cfg);
    REQUIRE(r.status == SolveStatus::converged);
    REQUIRE(std::abs(r.final_x[0]) <= 1e-6);
}

TEST_CASE("root iteration cycles exactly at the basin boundary") {
    const auto p = make_example1_root();
    SolverConfig cfg;
    const SolveResult r = newton_root_1d(residual_of(p), 2.0 / 3.0, cfg);
    REQUIRE(r.status == SolveStatus::oscillating);
}

TEST_CASE("root iteration escapes the basin and lands on another root") {
    // Outside |t| < 2/3 the iterates leave the target's basin; they end on
    // the residual's other roots at +-2, so the sweep classifies them as
    // escaped rather than truly unbounded.
    const auto p = make_example1_root();
    SolverConfig cfg;
    const SolveResult r = newton_root_1d(residual_of(p), 0.7, cfg);
    REQUIRE(r.status == SolveStatus::converged);
    REQUIRE(std::abs(std::abs(r.final_x[0]) - 2.0) <= 1e-6);
}

TEST_CASE("root iteration reports a zero derivative") {
    const auto p = make_example1_root();
    SolverConfig cfg;
    const SolveResult r = newton_root_1d(residual_of(p), 1.0, cfg);
    REQUIRE(r.status == SolveStatus::error);
    REQUIRE(r.status_detail.find("zero-derivative") != std::string::npos);
}

TEST_CASE("classical Newton solves a quadratic in one step") {
    const auto p = make_quadratic_diag({1.0, 100.0});
    SolverConfig cfg;
    const SolveResult r = classical_newton(p.oracle, Vector{1.0, 1.0}, cfg);
    REQUIRE(r.status == SolveStatus::converged);
    REQUIRE(r.trace.records.size() == 2);
    REQUIRE(norm2(r.final_x) <= 1e-14);
}

TEST_CASE("classical Newton on the sqrt example is the cubic map") {
    const auto p = make_example2_sqrt();
    SolverConfig cfg;
    cfg.epsilon = 1e-4;
    const SolveResult r = classical_newton(p.oracle, Vector{0.5}, cfg);
    REQUIRE(r.status == SolveStatus::converged);
    REQUIRE(r.trace.records.size() >= 3);
    REQUIRE(r.trace.records[1].x[0] == Approx(-0.125).margin(1e-14));
    REQUIRE(r.trace.records[2].x[0] == Approx(0.001953125).margin(1e-14));
    for (std::size_t s = 0; s + 1 < r.trace.records.size(); ++s) {
        const double t = r.trace.records[s].x[0];
        const double tn = r.trace.records[s + 1].x[0];
        if (std::abs(t) <= 1e-10) continue;
        REQUIRE(std::abs(tn + t * t * t) <= 1e-14 * std::abs(t));
    }
}

TEST_CASE("classical Newton oscillates at the unit boundary of the sqrt example") {
    const auto p = make_example2_sqrt();
    SolverConfig cfg;
    const SolveResult r = classical_newton(p.oracle, Vector{1.0}, cfg);
    REQUIRE(r.status == SolveStatus::oscillating);
    REQUIRE(r.trace.records[1].x[0] == Approx(-1.0));
    REQUIRE(r.trace.records[2].x[0] == Approx(1.0));
}

TEST_CASE("classical Newton diverges outside the unit basin") {
    const auto p = make_example2_sqrt();
    SolverConfig cfg;
    const SolveResult r = classical_newton(p.oracle, Vector{1.5}, cfg);
    REQUIRE(r.status == SolveStatus::diverged);
}

TEST_CASE("fixed-step damped Newton is exact on a well-scaled quadratic") {
    const auto p = make_quadratic_diag({1.0, 1.0});
    SolverConfig cfg;
    cfg.m = 1.0;
    cfg.L = 1.0;
    const SolveResult r = dnm_fixed(p.oracle, Vector{5.0, 5.0}, cfg);
    REQUIRE(r.status == SolveStatus::converged);
    REQUIRE(r.trace.records.size() == 2);
    REQUIRE(r.trace.records[1].full_step_accepted);
    REQUIRE(r.trace.records[1].step_length == 1.0);
}

TEST_CASE("fixed-step damped Newton reaches the symmetric minimizer") {
    const auto p = make_sqrt_plus_quadratic(1.0, 1);
    SolverConfig cfg;
    cfg.m = 1.0;
    cfg.L = 2.0;
    cfg.epsilon = 1e-4;
    const SolveResult r = dnm_fixed(p.oracle, Vector{5.0}, cfg);
    REQUIRE(r.status == SolveStatus::converged);
    REQUIRE(std::abs(r.final_x[0]) <= cfg.epsilon);

    // Independent check that the minimizer really is 0 (golden section is
    // sqrt(eps)-limited on smooth minima).
    const double xstar = testsupport::golden_minimize(
        [&](double t) { return p.oracle.value(std::span<const double>(&t, 1)); }, -6.0, 6.0);
    REQUIRE(std::abs(xstar) <= 1e-6);

    // Monotone descent and the fixed step floor.
    for (std::size_t s = 1; s < r.trace.records.size(); ++s) {
        REQUIRE(r.trace.records[s].f_decrease >= -1e-12);
        REQUIRE(r.trace.records[s].step_length >= *cfg.m / (2.0 * *cfg.L) - 1e-15);
    }
}

TEST_CASE("fixed-step damped Newton validates its constants") {
    const auto p = make_quadratic_diag({1.0, 1.0});
    {
        SolverConfig cfg;  // no m, L
        const SolveResult r = dnm_fixed(p.oracle, Vector{1.0, 1.0}, cfg);
        REQUIRE(r.status == SolveStatus::error);
        REQUIRE(r.status_detail.find("missing-constants") != std::string::npos);
    }
    {
        SolverConfig cfg;
        cfg.m = 1.0;
        cfg.L = 1.0;
        cfg.epsilon = 2.0;  // violates epsilon < m^2/L
        const SolveResult r = dnm_fixed(p.oracle, Vector{1.0, 1.0}, cfg);
        REQUIRE(r.status == SolveStatus::error);
        REQUIRE(r.status_detail.find("epsilon-too-large") != std::string::npos);
    }
}

TEST_CASE("fixed-step damped Newton falls back to m/(2L) on rejection") {
    const auto p = sharp_valley(0.01);
    SolverConfig cfg;
    cfg.m = 0.098;  // curvature floor on the region the iterates visit
    cfg.L = 100.0;  // curvature peak 1/a at the bottom of the valley
    cfg.epsilon = 1e-6;
    cfg.max_iterations = 5;
    const SolveResult r = dnm_fixed(p.oracle, Vector{0.02}, cfg);
    REQUIRE(r.trace.records.size() >= 2);
    REQUIRE_FALSE(r.trace.records[1].full_step_accepted);
    REQUIRE(r.trace.records[1].step_length == Approx(0.098 / 200.0).epsilon(1e-15));
}

TEST_CASE("backtracking damped Newton takes the full step on a quadratic") {
    const auto p = make_quadratic_diag({1.0, 100.0});
    SolverConfig cfg;
    const SolveResult r = dnm_backtracking(p.oracle, Vector{1.0, 1.0}, cfg);
    REQUIRE(r.status == SolveStatus::converged);
    REQUIRE(r.trace.records.size() == 2);
    REQUIRE(r.trace.records[1].step_length == 1.0);
}

TEST_CASE("backtracking damped Newton converges where classical Newton diverges") {
    const auto p = make_example2_sqrt();
    SolverConfig cfg;
    const SolveResult r = dnm_backtracking(p.oracle, Vector{2.0}, cfg);
    REQUIRE(r.status == SolveStatus::converged);
    REQUIRE(std::abs(r.final_x[0]) <= 1e-8);

    const double xstar = testsupport::golden_minimize(example2_value, -3.0, 3.0);
    REQUIRE(std::abs(r.final_x[0] - xstar) <= 1e-6);
}

TEST_CASE("backtracking returns the first admissible power of rho") {
    const auto p = make_example2_sqrt();
    SolverConfig cfg;
    const SolveResult r = dnm_backtracking(p.oracle, Vector{3.0}, cfg);
    REQUIRE(r.trace.records.size() >= 2);
    const IterationRecord& first = r.trace.records[1];
    REQUIRE(first.direction_norm == Approx(30.0).epsilon(1e-12));  // n(3) = -3(1+9)
    REQUIRE_FALSE(first.full_step_accepted);

    // Brute-force Armijo scan: smallest k with f(3 + rho^k n) admissible.
    const double f0 = example2_value(3.0);
    const double g3 = 3.0 / std::sqrt(10.0);
    const double slope0 = g3 * -30.0;
    int k_min = -1;
    for (int k = 0; k < 60; ++k) {
        const double t = std::pow(0.5, k);
        if (example2_value(3.0 - 30.0 * t) <= f0 + 0.5 * t * slope0) {
            k_min = k;
            break;
        }
    }
    REQUIRE(k_min >= 1);
    REQUIRE(first.step_length == Approx(std::pow(0.5, k_min)).epsilon(1e-15));
}

TEST_CASE("backtracking reports underflow on a broken oracle") {
    ObjectiveOracle broken;
    broken.dimension = 1;
    broken.value = [](std::span<const double>) { return 0.0; };  // flat value, nonzero gradient
    broken.gradient = [](std::span<const double>) { return Vector{1.0}; };
    broken.hessian = [](std::span<const double>) { return SymmetricMatrix::identity(1); };
    SolverConfig cfg;
    const SolveResult r = dnm_backtracking(broken, Vector{1.0}, cfg);
    REQUIRE(r.status == SolveStatus::error);
    REQUIRE(r.status_detail.find("underflow") != std::string::npos);
}

TEST_CASE("pure regularized Newton starts with the exact one-third iterate") {
    const auto p = make_example2_sqrt();
    SolverConfig cfg;
    const SolveResult r = rnm_pure(p.oracle, Vector{1.0}, cfg);
    REQUIRE(r.status == SolveStatus::converged);
    REQUIRE(r.trace.records[1].x[0] == Approx(1.0 / 3.0).margin(1e-15));
    REQUIRE(r.trace.records[2].x[0] == Approx(0.06306).margin(5e-4));
    for (std::size_t s = 1; s < r.trace.records.size(); ++s)
        REQUIRE(r.trace.records[s].f <= r.trace.records[s - 1].f + 1e-12);
}

TEST_CASE("pure regularized Newton accepts an optimal start immediately") {
    const auto p = make_sqrt_plus_quadratic(1.0, 3);
    SolverConfig cfg;
    const SolveResult r = rnm_pure(p.oracle, Vector{0.0, 0.0, 0.0}, cfg);
    REQUIRE(r.status == SolveStatus::converged);
    REQUIRE(r.trace.records.size() == 1);
    REQUIRE(r.trace.records[0].step_length == 0.0);
}

TEST_CASE("damped regularized Newton converges globally on the sqrt example") {
    const auto p = make_example2_sqrt();
    SolverConfig cfg;
    cfg.L = 1.0;
    cfg.epsilon = 1e-6;
    const SolveResult r = drnm(p.oracle, Vector{10.0}, cfg);
    REQUIRE(r.status == SolveStatus::converged);
    REQUIRE(std::abs(r.final_x[0]) <= cfg.epsilon);

    const double xstar = testsupport::golden_minimize(example2_value, -11.0, 11.0);
    REQUIRE(std::abs(r.final_x[0] - xstar) <= 1e-6);
}

TEST_CASE("damped regularized Newton descends monotonically on a quadratic") {
    const auto p = make_quadratic_diag({1.0, 1.0});
    SolverConfig cfg;
    cfg.L = 1.0;
    const SolveResult r = drnm(p.oracle, Vector{5.0, 0.0}, cfg);
    REQUIRE(r.status == SolveStatus::converged);
    for (std::size_t s = 1; s < r.trace.records.size(); ++s)
        REQUIRE(r.trace.records[s].f_decrease >= -1e-12);
}

TEST_CASE("damped regularized Newton uses the gradient-scaled fallback step") {
    const auto p = sharp_valley(0.01);
    SolverConfig cfg;
    cfg.L = 100.0;  // the valley's curvature bound 1/a
    cfg.epsilon = 1e-6;
    cfg.max_iterations = 400;
    const SolveResult r = drnm(p.oracle, Vector{0.02}, cfg);
    REQUIRE(r.trace.records.size() >= 2);

    bool saw_rejection = false;
    for (std::size_t s = 1; s < r.trace.records.size(); ++s) {
        const IterationRecord& rec = r.trace.records[s];
        const IterationRecord& prev = r.trace.records[s - 1];
        if (!rec.full_step_accepted) {
            saw_rejection = true;
            REQUIRE(rec.step_length ==
                    Approx(prev.grad_norm / (2.0 * *cfg.L)).epsilon(1e-14));
            // Per-step decrease guarantee for the damped regularized scheme.
            REQUIRE(rec.f_decrease >=
                    0.5 * rec.step_length * prev.decrement * prev.decrement - 1e-12);
        }
        REQUIRE(rec.step_length >=
                std::min(1.0, prev.grad_norm / (2.0 * *cfg.L)) - 1e-15);
    }
    REQUIRE(saw_rejection);
}

TEST_CASE("damped regularized Newton requires L") {
    const auto p = make_quadratic_diag({1.0, 1.0});
    SolverConfig cfg;
    const SolveResult r = drnm(p.oracle, Vector{1.0, 1.0}, cfg);
    REQUIRE(r.status == SolveStatus::error);
    REQUIRE(r.status_detail.find("missing-constants") != std::string::npos);
}

TEST_CASE("converged results honor the decrement stopping rule") {
    SolverConfig cfg;
    cfg.L = 2.0;
    cfg.m = 1.0;
    const double stop = std::pow(cfg.epsilon, 1.5);
    const auto p = make_sqrt_plus_quadratic(1.0, 2);
    const Vector x0{3.0, -2.0};
    for (const SolveResult& r :
         {dnm_fixed(p.oracle, x0, cfg), dnm_backtracking(p.oracle, x0, cfg),
          rnm_pure(p.oracle, x0, cfg), drnm(p.oracle, x0, cfg),
          classical_newton(p.oracle, x0, cfg)}) {
        REQUIRE(r.status == SolveStatus::converged);
        REQUIRE(r.trace.records.back().decrement <= stop);
    }
}

TEST_CASE("run_solver validates solver/problem compatibility") {
    const auto root = make_example1_root();
    const auto quad = make_quadratic_diag({1.0, 1.0});
    SolverConfig cfg;

    REQUIRE_THROWS_AS(run_solver(SolverKind::newton_root, quad, Vector{1.0, 1.0}, cfg),
                      UnsupportedProblem);
    REQUIRE_THROWS_AS(run_solver(SolverKind::drnm, root, Vector{0.5}, cfg),
                      UnsupportedProblem);

    // "newton" on a root residual is the root iteration.
    const SolveResult r = run_solver(SolverKind::newton, root, Vector{0.5}, cfg);
    REQUIRE(r.trace.solver == "newton-root");
    REQUIRE(r.status == SolveStatus::converged);
    REQUIRE(r.trace.problem == "example1-root");
}

TEST_CASE("concurrent solves on a shared oracle match serial solves") {
    const auto p = make_sqrt_plus_quadratic(1.0, 4);
    SolverConfig cfg;
    cfg.L = 2.0;
    const std::vector<Vector> starts = {
        {3.0, -1.0, 2.0, 0.5}, {-4.0, 4.0, -4.0, 4.0}, {0.1, 0.2, 0.3, 0.4}, {5.0, 5.0, 5.0, 5.0}};

    std::vector<SolveResult> serial;
    for (const Vector& x0 : starts) serial.push_back(drnm(p.oracle, x0, cfg));

    std::vector<SolveResult> parallel(starts.size());
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < starts.size(); ++i)
        workers.emplace_back(
            [&, i] { parallel[i] = drnm(p.oracle, starts[i], cfg); });
    for (std::thread& w : workers) w.join();

    for (std::size_t i = 0; i < starts.size(); ++i) {
        REQUIRE(parallel[i].status == serial[i].status);
        REQUIRE(parallel[i].final_x == serial[i].final_x);  // bitwise
        REQUIRE(parallel[i].trace.records.size() == serial[i].trace.records.size());
    }
}

TEST_CASE("solver configs reject out-of-range fields") {
    SolverConfig cfg;
    cfg.armijo_alpha = 0.9;
    REQUIRE_THROWS_AS(cfg.validate(), InvalidConfig);
    cfg = SolverConfig{};
    cfg.backtrack_rho = 1.0;
    REQUIRE_THROWS_AS(cfg.validate(), InvalidConfig);
    cfg = SolverConfig{};
    cfg.epsilon = 0.0;
    REQUIRE_THROWS_AS(cfg.validate(), InvalidConfig);
}
