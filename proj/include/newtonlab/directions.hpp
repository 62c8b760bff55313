#pragma once

/// Newton and regularized Newton directions, their decrements, direction
/// quality, and the conditioning comparison between the raw Hessian and its
/// gradient-norm regularization.

#include <cmath>
#include <optional>
#include <span>
#include <utility>

#include "newtonlab/errors.hpp"
#include "newtonlab/linalg.hpp"
#include "newtonlab/oracle.hpp"

namespace newtonlab {

enum class DirectionKind { newton, regularized, steepest };

struct DirectionReport {
    Vector direction;
    double decrement = 0.0;      // sqrt(-(g, direction)) for newton/regularized
    DirectionKind kind = DirectionKind::newton;
    double quality = 1.0;        // -(g,d)/(||g|| ||d||), 1 at an optimal point
    double gradient_norm = 0.0;
};

namespace detail {

/// The squared decrement is a quadratic form in a positive-definite system;
/// a value in [-1e-12, 0) is roundoff and clamps to zero, anything lower
/// means a broken oracle.
inline double clamp_decrement_sq(double v) {
    if (v >= 0.0) return v;
    if (v >= -1e-12) return 0.0;
    throw InternalConsistencyError("squared decrement came out negative: " + std::to_string(v));
}

inline double quality_of(const Vector& g, double gnorm, const Vector& d) {
    const double dnorm = norm2(d);
    if (gnorm == 0.0 || dnorm == 0.0) return 1.0;
    const double q = -dot(g, d) / (gnorm * dnorm);
    return std::clamp(q, 0.0, 1.0);
}

struct DirectionSolve {
    Vector direction;
    double decrement_sq;
};

/// d = -Hessian^{-1} g. Throws NotPositiveDefinite where the classical step
/// is undefined.
inline DirectionSolve solve_newton_system(const SymmetricMatrix& hess, const Vector& g) {
    const SpdFactorization f = factor_spd(hess);
    Vector minus_g(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) minus_g[i] = -g[i];
    Vector d = f.solve(minus_g);
    const double dec_sq = clamp_decrement_sq(-dot(g, d));
    return {std::move(d), dec_sq};
}

/// (Hessian + ||g|| I) d = -g; the zero direction when the gradient vanishes.
inline DirectionSolve solve_regularized_system(const SymmetricMatrix& hess, const Vector& g) {
    const double gnorm = norm2(g);
    if (gnorm == 0.0) return {Vector(g.size(), 0.0), 0.0};
    SymmetricMatrix reg = hess;
    for (std::size_t i = 0; i < reg.order(); ++i) reg.set(i, i, reg(i, i) + gnorm);
    try {
        const SpdFactorization f = factor_spd(reg);
        Vector minus_g(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) minus_g[i] = -g[i];
        Vector d = f.solve(minus_g);
        const double dec_sq = clamp_decrement_sq(-dot(g, d));
        return {std::move(d), dec_sq};
    } catch (const NotPositiveDefinite&) {
        throw ConvexityViolation();
    }
}

}  // namespace detail

inline DirectionReport newton_direction(const ObjectiveOracle& oracle,
                                        std::span<const double> x) {
    const Evaluation e = evaluate(oracle, x);
    auto [d, dec_sq] = detail::solve_newton_system(e.hess, e.grad);
    const double gnorm = norm2(e.grad);
    const double q = detail::quality_of(e.grad, gnorm, d);
    return {std::move(d), std::sqrt(dec_sq), DirectionKind::newton, q, gnorm};
}

inline DirectionReport regularized_direction(const ObjectiveOracle& oracle,
                                             std::span<const double> x) {
    const Evaluation e = evaluate(oracle, x);
    auto [d, dec_sq] = detail::solve_regularized_system(e.hess, e.grad);
    const double gnorm = norm2(e.grad);
    const double q = detail::quality_of(e.grad, gnorm, d);
    return {std::move(d), std::sqrt(dec_sq), DirectionKind::regularized, q, gnorm};
}

inline DirectionReport steepest_direction(const ObjectiveOracle& oracle,
                                          std::span<const double> x) {
    const Evaluation e = evaluate(oracle, x);
    const double gnorm = norm2(e.grad);
    Vector d(e.grad.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = -e.grad[i];
    return {std::move(d), gnorm, DirectionKind::steepest, 1.0, gnorm};
}

/// Quality of an arbitrary direction d at x: -(g,d)/(||g|| ||d||), in [-1,1];
/// positive for descent directions, 1 for steepest descent.
inline double direction_quality(const ObjectiveOracle& oracle, std::span<const double> x,
                                std::span<const double> d) {
    const Vector g = oracle.gradient(x);
    const double gnorm = norm2(g);
    const double dnorm = norm2(d);
    if (gnorm == 0.0 || dnorm == 0.0) throw ZeroGradientOrDirection();
    return std::clamp(-dot(g, d) / (gnorm * dnorm), -1.0, 1.0);
}

struct ConditioningReport {
    double m_x = 0.0;       // smallest Hessian eigenvalue at x
    double M_x = 0.0;       // largest Hessian eigenvalue at x
    double grad_norm = 0.0;
    std::optional<double> cond_hessian;      // m_x / M_x, undefined when M_x = 0
    std::optional<double> cond_regularized;  // (m_x+||g||) / (M_x+||g||)
    std::optional<double> gap;               // ||g|| (1 - cond_hessian) / (M_x+||g||)
};

/// How much the gradient-norm regularization improves the condition number
/// of the Hessian at x.
inline ConditioningReport conditioning(const ObjectiveOracle& oracle,
                                       std::span<const double> x) {
    const Evaluation e = evaluate(oracle, x);
    ConditioningReport r;
    std::tie(r.m_x, r.M_x) = extreme_eigenvalues(e.hess);
    r.grad_norm = norm2(e.grad);
    if (r.M_x > 0.0) {
        r.cond_hessian = r.m_x / r.M_x;
        r.cond_regularized = (r.m_x + r.grad_norm) / (r.M_x + r.grad_norm);
        r.gap = r.grad_norm * (1.0 - *r.cond_hessian) / (r.M_x + r.grad_norm);
    } else if (r.M_x + r.grad_norm > 0.0) {
        r.cond_regularized = (r.m_x + r.grad_norm) / (r.M_x + r.grad_norm);
    }
    return r;
}

}  // namespace newtonlab
