#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace newtonlab {

/// Base class for every exception thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    DimensionMismatch(std::size_t expected, std::size_t got)
        : Error("dimension mismatch: expected " + std::to_string(expected) +
                ", got " + std::to_string(got)) {}
};

/// The leading minor of order `pivot` (1-based, LAPACK convention) is not
/// positive definite.
struct NotPositiveDefinite : Error {
    std::size_t pivot;
    explicit NotPositiveDefinite(std::size_t pivot_1based)
        : Error("matrix not positive definite at pivot index " +
                std::to_string(pivot_1based)),
          pivot(pivot_1based) {}
};

/// An oracle returned a non-finite value, gradient, or Hessian entry.
struct OracleEvaluationError : Error {
    std::vector<double> point;
    explicit OracleEvaluationError(std::vector<double> x)
        : Error("oracle produced a non-finite output"), point(std::move(x)) {}
};

/// The regularized system H + ||g||I failed to factor: the smallest Hessian
/// eigenvalue is below -||g||, so the oracle is not convex at this point.
struct ConvexityViolation : Error {
    ConvexityViolation() : Error("regularized system not positive definite: oracle violates convexity") {}
};

struct ZeroGradientOrDirection : Error {
    ZeroGradientOrDirection() : Error("direction quality undefined: zero gradient or direction") {}
};

struct NonDescentDirection : Error {
    explicit NonDescentDirection(double slope)
        : Error("backtracking requires a descent direction, slope " + std::to_string(slope)) {}
};

struct StepUnderflow : Error {
    explicit StepUnderflow(double t)
        : Error("backtracking step underflow at t = " + std::to_string(t)) {}
};

struct InvalidConfig : Error {
    using Error::Error;
};

struct InvalidConstants : Error {
    using Error::Error;
};

struct MissingConstants : Error {
    using Error::Error;
};

struct UnknownProblem : Error {
    explicit UnknownProblem(const std::string& name) : Error("unknown problem: " + name) {}
};

struct UnsupportedProblem : Error {
    using Error::Error;
};

struct VariantMismatch : Error {
    using Error::Error;
};

struct SingularTransform : Error {
    SingularTransform() : Error("transform matrix is singular") {}
};

/// A quantity that is non-negative in exact arithmetic came out more negative
/// than roundoff can explain.
struct InternalConsistencyError : Error {
    using Error::Error;
};

}  // namespace newtonlab
