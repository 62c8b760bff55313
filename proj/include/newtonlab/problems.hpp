#pragma once

/// Built-in test problems and the name-addressable registry behind the CLI.
///
/// Registry syntax: a problem name optionally followed by colon-separated
/// parameters, e.g. "quadratic-diag:1,100" (diagonal entries) or
/// "sqrt-plus-quadratic:1:n=50" (coupling weight, then dimension).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "newtonlab/errors.hpp"
#include "newtonlab/oracle.hpp"

namespace newtonlab {

struct ProblemInstance {
    std::string name;
    ObjectiveOracle oracle;
    std::vector<std::string> tags;
    double box_half_width = 10.0;          // test box [-w, w]^n
    std::vector<double> basin_boundaries;  // starts with known oscillation, when any

    bool has_tag(const std::string& t) const {
        return std::find(tags.begin(), tags.end(), t) != tags.end();
    }
    /// True for 1D residual problems meant only for the root iteration.
    bool root_only() const { return has_tag("root-residual"); }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

inline double parse_number(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw UnknownProblem("bad numeric parameter '" + s + "'");
    }
    if (used != s.size()) throw UnknownProblem("bad numeric parameter '" + s + "'");
    return v;
}

/// Largest slope of h(t) = (1+t^2)^{-3/2}, i.e. max_t 3|t|(1+t^2)^{-5/2},
/// attained at t = 1/2; equals 48*sqrt(5)/125 = 0.8586501...  This is the
/// Hessian Lipschitz constant of sqrt(1+t^2) per coordinate.
inline double sqrt_term_hessian_lipschitz() { return 48.0 * std::sqrt(5.0) / 125.0; }

}  // namespace detail

/// f(t) = sqrt(1+t^2): strictly convex on R, strongly convex near its
/// minimizer t* = 0. The classical Newton iteration on it is exactly
/// t -> -t^3.
inline ProblemInstance make_example2_sqrt() {
    ObjectiveOracle oracle;
    oracle.dimension = 1;
    oracle.value = [](std::span<const double> x) { return std::sqrt(1.0 + x[0] * x[0]); };
    oracle.gradient = [](std::span<const double> x) {
        return Vector{x[0] / std::sqrt(1.0 + x[0] * x[0])};
    };
    oracle.hessian = [](std::span<const double> x) {
        const double w = 1.0 + x[0] * x[0];
        SymmetricMatrix h(1);
        h.set(0, 0, 1.0 / (w * std::sqrt(w)));
        return h;
    };
    AnalyticConstants c;
    c.m = 1.0;  // curvature at the minimizer; valid for the local theory only
    c.M = detail::sqrt_term_hessian_lipschitz();
    c.L = 1.0;
    c.minimizer = Vector{0.0};
    c.min_value = 1.0;
    oracle.constants = c;
    return ProblemInstance{"example2-sqrt", std::move(oracle),
                           {"1d-example", "strictly-convex"}, 10.0,
                           {-1.0, 1.0}};
}

/// Piecewise quadratic residual g with roots {-2, 0, 2}: the 1D root
/// iteration on it converges to 0 only from |t| < 2/3 and cycles at +-2/3.
/// The oracle exposes the antiderivative of g as the value so derivative
/// checks stay consistent; the minimization solvers never see this problem.
inline ProblemInstance make_example1_root() {
    ObjectiveOracle oracle;
    oracle.dimension = 1;
    oracle.value = [](std::span<const double> x) {
        const double t = x[0];
        return t >= 0.0 ? t * t - t * t * t / 3.0 : t * t * t / 3.0 + t * t;
    };
    oracle.gradient = [](std::span<const double> x) {
        const double t = x[0];
        return Vector{t >= 0.0 ? 2.0 * t - t * t : t * t + 2.0 * t};
    };
    oracle.hessian = [](std::span<const double> x) {
        SymmetricMatrix h(1);
        h.set(0, 0, x[0] >= 0.0 ? 2.0 - 2.0 * x[0] : 2.0 * x[0] + 2.0);
        return h;
    };
    AnalyticConstants c;
    c.minimizer = Vector{0.0};  // the target root
    c.min_value = 0.0;
    oracle.constants = c;
    return ProblemInstance{"example1-root", std::move(oracle),
                           {"1d-example", "root-residual"}, 10.0,
                           {-2.0 / 3.0, 2.0 / 3.0}};
}

/// f(x) = 1/2 sum d_i x_i^2 with d_i > 0.
inline ProblemInstance make_quadratic_diag(std::vector<double> diag) {
    if (diag.empty()) throw UnknownProblem("quadratic-diag needs at least one diagonal entry");
    for (double d : diag)
        if (!(d > 0.0)) throw InvalidConstants("quadratic-diag entries must be positive");
    const std::size_t n = diag.size();

    std::string name = "quadratic-diag:";
    for (std::size_t i = 0; i < n; ++i) {
        if (i) name += ',';
        std::string entry = std::to_string(diag[i]);
        entry.erase(entry.find_last_not_of('0') + 1);
        if (!entry.empty() && entry.back() == '.') entry.pop_back();
        name += entry;
    }

    ObjectiveOracle oracle;
    oracle.dimension = n;
    auto d = std::make_shared<std::vector<double>>(std::move(diag));
    oracle.value = [d](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (*d)[i] * x[i] * x[i];
        return 0.5 * s;
    };
    oracle.gradient = [d](std::span<const double> x) {
        Vector g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = (*d)[i] * x[i];
        return g;
    };
    oracle.hessian = [d](std::span<const double>) { return SymmetricMatrix::diagonal(*d); };
    AnalyticConstants c;
    c.m = *std::min_element(d->begin(), d->end());
    c.M = 0.0;
    c.L = *std::max_element(d->begin(), d->end());
    c.minimizer = Vector(n, 0.0);
    c.min_value = 0.0;
    oracle.constants = c;
    return ProblemInstance{std::move(name), std::move(oracle),
                           {"strongly-convex", "quadratic"}, 10.0, {}};
}

/// f(x) = sum sqrt(1+x_i^2) + mu/2 ||x||^2: globally strongly convex with
/// m = mu, L = mu + 1, and the sqrt-term Hessian Lipschitz constant M.
inline ProblemInstance make_sqrt_plus_quadratic(double mu, std::size_t n) {
    if (!(mu > 0.0)) throw InvalidConstants("sqrt-plus-quadratic weight must be positive");
    if (n == 0) throw UnknownProblem("sqrt-plus-quadratic dimension must be positive");

    std::string name = "sqrt-plus-quadratic:";
    {
        std::string entry = std::to_string(mu);
        entry.erase(entry.find_last_not_of('0') + 1);
        if (!entry.empty() && entry.back() == '.') entry.pop_back();
        name += entry;
    }
    if (n != 1) name += ":n=" + std::to_string(n);

    ObjectiveOracle oracle;
    oracle.dimension = n;
    oracle.value = [mu](std::span<const double> x) {
        double s = 0.0;
        for (double t : x) s += std::sqrt(1.0 + t * t) + 0.5 * mu * t * t;
        return s;
    };
    oracle.gradient = [mu](std::span<const double> x) {
        Vector g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            g[i] = x[i] / std::sqrt(1.0 + x[i] * x[i]) + mu * x[i];
        return g;
    };
    oracle.hessian = [mu](std::span<const double> x) {
        SymmetricMatrix h(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double w = 1.0 + x[i] * x[i];
            h.set(i, i, 1.0 / (w * std::sqrt(w)) + mu);
        }
        return h;
    };
    AnalyticConstants c;
    c.m = mu;
    c.M = detail::sqrt_term_hessian_lipschitz();
    c.L = mu + 1.0;
    c.minimizer = Vector(n, 0.0);
    c.min_value = static_cast<double>(n);
    oracle.constants = c;
    return ProblemInstance{std::move(name), std::move(oracle), {"strongly-convex"}, 10.0, {}};
}

/// Resolves a registry name string, parsing any parameters after colons.
inline ProblemInstance problem_from_name(const std::string& full_name) {
    const std::vector<std::string> parts = detail::split(full_name, ':');
    const std::string& base = parts[0];

    if (base == "example1-root") {
        if (parts.size() != 1) throw UnknownProblem(full_name);
        return make_example1_root();
    }
    if (base == "example2-sqrt") {
        if (parts.size() != 1) throw UnknownProblem(full_name);
        return make_example2_sqrt();
    }
    if (base == "quadratic-diag") {
        if (parts.size() != 2) throw UnknownProblem(full_name);
        std::vector<double> diag;
        for (const std::string& p : detail::split(parts[1], ','))
            diag.push_back(detail::parse_number(p));
        return make_quadratic_diag(std::move(diag));
    }
    if (base == "sqrt-plus-quadratic") {
        if (parts.size() < 2 || parts.size() > 3) throw UnknownProblem(full_name);
        const double mu = detail::parse_number(parts[1]);
        std::size_t n = 1;
        if (parts.size() == 3) {
            if (parts[2].rfind("n=", 0) != 0) throw UnknownProblem(full_name);
            const double nv = detail::parse_number(parts[2].substr(2));
            if (nv < 1.0 || nv != std::floor(nv)) throw UnknownProblem(full_name);
            n = static_cast<std::size_t>(nv);
        }
        return make_sqrt_plus_quadratic(mu, n);
    }
    throw UnknownProblem(full_name);
}

/// Default registry contents, as listed by the CLI.
inline std::vector<ProblemInstance> builtin_problems() {
    std::vector<ProblemInstance> all;
    all.push_back(make_example1_root());
    all.push_back(make_example2_sqrt());
    all.push_back(make_quadratic_diag({1.0, 100.0}));
    all.push_back(make_sqrt_plus_quadratic(1.0, 1));
    all.push_back(make_sqrt_plus_quadratic(1.0, 10));
    return all;
}

}  // namespace newtonlab
