#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "degenma/experiments.hpp"
#include "degenma/grushin.hpp"
#include "oracles.hpp"

using namespace degenma;

namespace {

GridSpec square(double half, int n_per_unit) {
    return GridSpec::with_spacing({-half, half, -half, half}, 1.0 / n_per_unit);
}

double max_nodal_error(const GridFunction& u, const std::function<double(Point)>& f) {
    double e = 0.0;
    const auto& s = u.spec();
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) e = std::max(e, std::abs(u(i, j) - f(s.node(i, j))));
    return e;
}

}  // namespace

TEST(GrushinSolve, ConstantData) {
    const auto s = square(1, 16);
    auto [u, rep] = solve_dirichlet(s, 2.0, 2.0 / 16, [](Point) { return 5.0; });
    EXPECT_LE(max_nodal_error(u, [](Point) { return 5.0; }), 1e-10);
    EXPECT_TRUE(rep.converged);
}

TEST(GrushinSolve, QuadraticExactAtAlphaZero) {
    const auto s = square(1, 64);
    auto exact = [](Point p) { return (-p.x1 * p.x1 + p.x2 * p.x2) / 2; };
    auto [u, rep] = solve_dirichlet(s, 0.0, 2.0 / 64, exact);
    EXPECT_LE(max_nodal_error(u, exact), 1e-9);
    EXPECT_LE(rep.final_residual, 1e-10);
}

TEST(GrushinSolve, AffineDataReproducedForAnyAlphaEps) {
    oracle::Rng rng(41);
    for (int k = 0; k < 8; ++k) {
        const double c0 = rng.uniform(-1, 1), c1 = rng.uniform(-2, 2), c2 = rng.uniform(-2, 2);
        const double alpha = rng.uniform(-0.9, 3.0), eps = rng.uniform(0.01, 0.3);
        auto f = [&](Point p) { return c0 + c1 * p.x1 + c2 * p.x2; };
        auto [u, rep] = solve_dirichlet(square(1, 16), alpha, eps, f);
        EXPECT_LE(max_nodal_error(u, f), 1e-10) << alpha << " " << eps;
    }
}

TEST(GrushinSolve, ManufacturedConvergence) {
    for (double alpha : {1.0, 2.0}) {
        const FamilyParams d{alpha, 1, 0, {}};
        auto exact = [&](Point p) { return dual_closed_form(d, p); };
        std::vector<double> err;
        for (int n : {32, 64, 128}) {
            auto [u, rep] = solve_dirichlet(square(1, n), alpha, 2.0 / n, exact);
            err.push_back(max_nodal_error(u, exact));
            EXPECT_GE(rep.max_principle_margin, -1e-9);
        }
        EXPECT_LT(err[1], err[0]);
        EXPECT_LT(err[2], err[1]);
    }
}

TEST(GrushinSolve, MaximumPrincipleOnRandomData) {
    const auto s = square(1, 32);
    const GrushinSolver solver(s, 2.0, 2.0 / 32);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        oracle::Rng rng(seed);
        GridFunction g(s);
        for (std::size_t k = 0; k < s.size(); ++k) g.values()[k] = rng.uniform(-3, 3);
        auto [u, rep] = solver.solve(g);
        EXPECT_GE(rep.max_principle_margin, -1e-10);
        EXPECT_TRUE(rep.converged);
    }
}

TEST(GrushinSolve, Linearity) {
    const auto s = square(1, 32);
    const GrushinSolver solver(s, 1.5, 2.0 / 32);
    const auto g1 = sample(s, experiments::TrigBoundaryData(3, s.box()));
    const auto g2 = sample(s, experiments::TrigBoundaryData(4, s.box()));
    const double lambda = -2.7;
    GridFunction g3(s);
    for (std::size_t k = 0; k < s.size(); ++k) g3.values()[k] = g1.values()[k] + lambda * g2.values()[k];
    const auto u1 = solver.solve(g1).first, u2 = solver.solve(g2).first, u3 = solver.solve(g3).first;
    for (std::size_t k = 0; k < s.size(); ++k)
        ASSERT_NEAR(u3.values()[k], u1.values()[k] + lambda * u2.values()[k], 1e-9);
}

TEST(GrushinSolve, EvenDataGivesEvenSolution) {
    const auto s = square(1, 32);
    auto g = [](Point p) { return std::cos(2 * p.x1) + p.x2 * p.x1 * p.x1 + 0.3 * p.x2; };
    auto [u, rep] = solve_dirichlet(s, 2.0, 2.0 / 32, g);
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) ASSERT_NEAR(u(i, j), u(s.nx - 1 - i, j), 1e-10);
}

TEST(GrushinSolve, RejectsBadInput) {
    const auto s = square(1, 8);
    EXPECT_THROW(solve_dirichlet(s, -1.0, 0.1, [](Point) { return 0.0; }), std::invalid_argument);
    EXPECT_THROW(solve_dirichlet(s, 1.0, 0.0, [](Point) { return 0.0; }), std::invalid_argument);
    GridFunction g(s, 0.0);
    g(0, 0) = std::nan("");
    EXPECT_THROW(solve_dirichlet(s, 1.0, 0.1, g), std::invalid_argument);
    EXPECT_THROW(GrushinSolver(s, 1.0, 0.1).solve(GridFunction(square(1, 4))), std::invalid_argument);
}

TEST(Harnack, ConstantAndLinearFields) {
    const SectionSpec s1{0, {0, 0}, 1};
    EXPECT_DOUBLE_EQ(harnack_quotient(sample(square(1.5, 32), [](Point) { return 4.0; }), s1).quotient, 1.0);
    const auto u = sample(square(1.5, 128), [](Point p) { return 2 + p.x2; });
    EXPECT_NEAR(harnack_quotient(u, s1).quotient, 3.0, 0.06);
    const auto v = sample(square(1.5, 128), [](Point p) { return 2 + p.x1; });
    EXPECT_NEAR(harnack_quotient(v, SectionSpec{2, {0, 0}, 1}).quotient, 3.0, 0.06);
}

TEST(Harnack, Errors) {
    const SectionSpec s1{0, {0, 0}, 1};
    EXPECT_THROW(harnack_quotient(sample(square(1.5, 16), [](Point p) { return p.x1; }), s1), std::domain_error);
    EXPECT_THROW(harnack_quotient(sample(square(0.5, 16), [](Point) { return 1.0; }), s1), std::invalid_argument);
}

TEST(Harnack, QuotientStableUnderRefinement) {
    const Box dom{-1.5, 1.5, -1.5, 1.5};
    const SectionSpec s1{2, {0, 0}, 1};
    for (std::uint64_t seed : {5u, 6u, 7u}) {
        const experiments::TrigBoundaryData g(seed, dom);
        const double q1 = harnack_quotient(solve_dirichlet(square(1.5, 32), 2.0, 2.0 / 32, g).first, s1).quotient;
        const double q2 = harnack_quotient(solve_dirichlet(square(1.5, 64), 2.0, 2.0 / 64, g).first, s1).quotient;
        EXPECT_GE(q1, 1.0);
        EXPECT_LE(std::abs(q2 - q1) / q1, 0.10);
    }
}

TEST(Holder, ConstantFieldsGiveZero) {
    const SectionSpec in{2, {0, 0}, 1}, out{2, {0, 0}, 2};
    EXPECT_EQ(holder_estimate(sample(square(1.5, 16), [](Point) { return 0.0; }), 0.5, in, out), 0.0);
    EXPECT_EQ(holder_estimate(sample(square(1.5, 16), [](Point) { return 7.0; }), 0.5, in, out), 0.0);
    EXPECT_THROW(holder_estimate(sample(square(1.5, 16), [](Point) { return 7.0; }), 0.5, out, in),
                 std::invalid_argument);
}

TEST(Holder, LinearFieldMatchesHandValue) {
    // u = x2: seminorm over lattice pairs is max |dy|^(1-gamma) over the sample
    const SectionSpec in{0, {0, 0}, 0.25}, out{0, {0, 0}, 1};
    const auto u = sample(square(1.5, 32), [](Point p) { return p.x2; });
    const auto pts = section_sample_points(in, 1.0 / 16);
    double ymin = 1, ymax = -1;
    for (const auto& p : pts) {
        ymin = std::min(ymin, p.x2);
        ymax = std::max(ymax, p.x2);
    }
    const double sup = 1.0 - 1.0 / 32;  // largest |x2| over nodes strictly inside the unit disk
    EXPECT_NEAR(holder_estimate(u, 0.5, in, out), std::sqrt(ymax - ymin) / sup, 1e-12);
}

TEST(DerivativeBound, Examples) {
    const auto s = square(1, 32);
    const std::vector<double> eps{1.0 / 8, 1.0 / 16, 1.0 / 32};
    for (const auto& row : derivative_bound_scan(s, 2.0, sample(s, [](Point) { return 3.0; }), eps))
        EXPECT_NEAR(row.ratio, 0.0, 1e-10);
    for (const auto& row : derivative_bound_scan(s, 2.0, sample(s, [](Point p) { return p.x2; }), eps))
        EXPECT_NEAR(row.ratio, 1.0, 1e-9);
    EXPECT_THROW(derivative_bound_scan(s, 2.0, sample(s, [](Point) { return 3.0; }), {0.1, 0.2}),
                 std::invalid_argument);
}

TEST(DerivativeBound, EpsUniformOnRandomData) {
    const auto s = square(1, 128);
    const auto g = sample(s, experiments::TrigBoundaryData(1, s.box()));
    const auto rows = derivative_bound_scan(s, 2.0, g, {1.0 / 16, 1.0 / 32, 1.0 / 64});
    double lo = 1e300, hi = 0;
    for (const auto& r : rows) {
        lo = std::min(lo, r.ratio);
        hi = std::max(hi, r.ratio);
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LE(hi / lo, 1.5);
}
