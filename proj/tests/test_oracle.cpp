#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "newtonlab/oracle.hpp"
#include "newtonlab/problems.hpp"
#include "test_support.hpp"

using namespace newtonlab;
using Catch::Approx;

TEST_CASE("evaluate bundles value, gradient, Hessian") {
    const auto quadratic = make_quadratic_diag({1.0, 1.0});  // f = ||x||^2 / 2
    const Vector x{3.0, 4.0};
    const Evaluation e = evaluate(quadratic.oracle, x);
    REQUIRE(e.f == Approx(12.5));
    REQUIRE(e.grad[0] == Approx(3.0));
    REQUIRE(e.grad[1] == Approx(4.0));
    REQUIRE(e.hess(0, 0) == Approx(1.0));
    REQUIRE(e.hess(1, 1) == Approx(1.0));
    REQUIRE(e.hess(0, 1) == 0.0);
}

TEST_CASE("evaluate on the sqrt example matches its closed forms") {
    const auto p = make_example2_sqrt();
    {
        const Evaluation e = evaluate(p.oracle, Vector{1.0});
        REQUIRE(e.f == Approx(std::sqrt(2.0)).epsilon(1e-15));
        REQUIRE(e.grad[0] == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
        REQUIRE(e.hess(0, 0) == Approx(std::pow(2.0, -1.5)).epsilon(1e-15));
    }
    {
        const Evaluation e = evaluate(p.oracle, Vector{0.0});
        REQUIRE(e.f == 1.0);
        REQUIRE(e.grad[0] == 0.0);
        REQUIRE(e.hess(0, 0) == 1.0);
    }
}

TEST_CASE("evaluate rejects bad input and non-finite output") {
    const auto quadratic = make_quadratic_diag({1.0, 1.0});
    REQUIRE_THROWS_AS(evaluate(quadratic.oracle, Vector{1.0}), DimensionMismatch);

    const double nan = std::nan("");
    REQUIRE_THROWS_AS(evaluate(quadratic.oracle, Vector{nan, 0.0}), OracleEvaluationError);

    ObjectiveOracle broken = quadratic.oracle;
    broken.value = [](std::span<const double>) { return std::nan(""); };
    REQUIRE_THROWS_AS(evaluate(broken, Vector{1.0, 1.0}), OracleEvaluationError);
}

TEST_CASE("derivative check passes on exact polynomial derivatives") {
    const auto quadratic = make_quadratic_diag({1.0, 1.0});
    const auto report = check_oracle(quadratic.oracle, Vector{1.0, 1.0}, 1e-6);
    REQUIRE(report.pass);
    REQUIRE(report.max_gradient_error <= 1e-7);
    REQUIRE(report.max_hessian_error <= 1e-7);
}

TEST_CASE("derivative check passes on the sqrt example") {
    const auto p = make_example2_sqrt();
    const auto report = check_oracle(p.oracle, Vector{0.5}, 1e-6);
    REQUIRE(report.pass);
}

TEST_CASE("derivative check flags a corrupted gradient") {
    const auto quadratic = make_quadratic_diag({1.0, 1.0});
    ObjectiveOracle corrupted = quadratic.oracle;
    const auto base_grad = quadratic.oracle.gradient;
    corrupted.gradient = [base_grad](std::span<const double> x) {
        Vector g = base_grad(x);
        g[0] += 0.1;
        return g;
    };
    const auto report = check_oracle(corrupted, Vector{1.0, 1.0}, 1e-6);
    REQUIRE_FALSE(report.pass);
    REQUIRE(report.max_gradient_error > 1e-4);
}

TEST_CASE("derivative check rejects a non-positive step") {
    const auto quadratic = make_quadratic_diag({1.0, 1.0});
    REQUIRE_THROWS_AS(check_oracle(quadratic.oracle, Vector{1.0, 1.0}, 0.0), InvalidConstants);
}
