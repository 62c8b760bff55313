#pragma once

/// Objective oracle abstraction: a function together with its gradient and
/// Hessian, plus optional analytic constants, and a finite-difference checker
/// that guards user-supplied oracles.

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "newtonlab/errors.hpp"
#include "newtonlab/linalg.hpp"

namespace newtonlab {

/// Analytic constants of an objective, when known.
struct AnalyticConstants {
    std::optional<double> m;          // strong-convexity modulus, Hessian >= m I
    std::optional<double> M;          // Lipschitz constant of the Hessian
    std::optional<double> L;          // Lipschitz constant of the gradient, ||Hessian|| <= L
    std::optional<Vector> minimizer;
    std::optional<double> min_value;
    std::optional<double> sublevel_radius;  // r0 of the initial sublevel set, if fixed

    void validate() const {
        if (m && !(*m > 0.0)) throw InvalidConstants("m must be positive");
        if (M && !(*M >= 0.0)) throw InvalidConstants("M must be non-negative");
        if (L && !(*L > 0.0)) throw InvalidConstants("L must be positive");
        if (m && L && !(*m <= *L)) throw InvalidConstants("m must not exceed L");
    }
};

/// Twice continuously differentiable objective. Oracles are immutable after
/// construction and hold no evaluation state, so concurrent evaluation is safe.
struct ObjectiveOracle {
    std::size_t dimension = 0;
    std::function<double(std::span<const double>)> value;
    std::function<Vector(std::span<const double>)> gradient;
    std::function<SymmetricMatrix(std::span<const double>)> hessian;
    std::optional<AnalyticConstants> constants;
};

struct Evaluation {
    double f;
    Vector grad;
    SymmetricMatrix hess;
};

/// Bundles the three oracle calls and verifies every output is finite.
inline Evaluation evaluate(const ObjectiveOracle& oracle, std::span<const double> x) {
    if (x.size() != oracle.dimension) throw DimensionMismatch(oracle.dimension, x.size());
    if (!all_finite(x)) throw OracleEvaluationError(Vector(x.begin(), x.end()));
    Evaluation e{oracle.value(x), oracle.gradient(x), oracle.hessian(x)};
    if (!std::isfinite(e.f) || !all_finite(e.grad) || !e.hess.finite())
        throw OracleEvaluationError(Vector(x.begin(), x.end()));
    return e;
}

struct DerivativeCheckReport {
    double max_gradient_error = 0.0;  // gradient vs central differences of the value
    double max_hessian_error = 0.0;   // Hessian vs central differences of the gradient
    double threshold = 1e-4;
    bool pass = false;
};

/// Central-difference check of the oracle's own derivatives. Errors are
/// normalized by max(1, magnitude of the analytic quantity).
inline DerivativeCheckReport check_oracle(const ObjectiveOracle& oracle,
                                          std::span<const double> x, double h) {
    if (!(h > 0.0)) throw InvalidConstants("finite-difference step must be positive");
    const std::size_t n = oracle.dimension;
    const Evaluation e = evaluate(oracle, x);

    Vector xp(x.begin(), x.end());
    Vector xm(x.begin(), x.end());

    DerivativeCheckReport report;
    const double gscale = std::max(1.0, norm_inf(e.grad));
    double hscale = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) hscale = std::max(hscale, std::abs(e.hess(i, j)));

    for (std::size_t j = 0; j < n; ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        const double fd_grad = (oracle.value(xp) - oracle.value(xm)) / (2.0 * h);
        report.max_gradient_error =
            std::max(report.max_gradient_error, std::abs(fd_grad - e.grad[j]) / gscale);

        const Vector gp = oracle.gradient(xp);
        const Vector gm = oracle.gradient(xm);
        for (std::size_t i = 0; i < n; ++i) {
            const double fd_hess = (gp[i] - gm[i]) / (2.0 * h);
            report.max_hessian_error =
                std::max(report.max_hessian_error, std::abs(fd_hess - e.hess(i, j)) / hscale);
        }
        xp[j] = x[j];
        xm[j] = x[j];
    }
    report.pass = report.max_gradient_error <= report.threshold &&
                  report.max_hessian_error <= report.threshold;
    return report;
}

/// Default finite-difference step used by oracle validation.
inline double default_fd_step(std::span<const double> x) {
    return 1e-6 * (1.0 + norm_inf(x));
}

}  // namespace newtonlab
