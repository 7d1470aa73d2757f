#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "degenma/analytic.hpp"
#include "degenma/ma.hpp"
#include "degenma/plegendre.hpp"
#include "oracles.hpp"

using namespace degenma;

namespace {

GridSpec unit_square(int n) { return GridSpec::with_spacing({-1, 1, -1, 1}, 1.0 / n); }

double max_dual_error(const DualGridFunction& d, const std::function<double(Point)>& exact) {
    const auto& s = d.spec();
    double e = 0.0;
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) e = std::max(e, std::abs(d.values(i, j) - exact(s.node(i, j))));
    return e;
}

}  // namespace

TEST(ForwardTransform, HalfSquareInX2) {
    for (int n : {8, 32}) {
        const auto u = sample(unit_square(n), [](Point p) { return p.x2 * p.x2 / 2; });
        const auto d = forward_transform(u, 2 * n + 1);
        EXPECT_NEAR(d.p2_range.first, -1.0, 1e-12);
        EXPECT_NEAR(d.p2_range.second, 1.0, 1e-12);
        EXPECT_LE(max_dual_error(d, [](Point q) { return q.x2 * q.x2 / 2; }), 1e-12);
    }
}

TEST(ForwardTransform, FamilyAlphaZeroMatchesClosedForm) {
    const FamilyParams p{0, 1, 0, {}};
    const auto u = sample(unit_square(32), [&](Point x) { return family_eval(p, x); });
    const auto d = forward_transform(u, 65);
    EXPECT_LE(max_dual_error(d, [](Point q) { return (-q.x1 * q.x1 + q.x2 * q.x2) / 2; }), 1e-12);
}

TEST(ForwardTransform, FamilyMatchesBruteForceLegendre) {
    oracle::Rng rng(53);
    for (double alpha : {0.0, 1.0, 2.0}) {
        const FamilyParams p{alpha, rng.uniform(0.5, 2), rng.uniform(-0.4, 0.4),
                             {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.2, 0.2)}};
        auto f = [&](Point x) { return family_eval(p, x); };
        const auto u = sample(GridSpec::with_spacing({-1, 1, -2, 2}, 1.0 / 32), f);
        const auto d = forward_transform(u, 65);
        const auto& s = d.spec();
        for (int j = 0; j < s.ny; j += 8)
            for (int i = 0; i < s.nx; i += 8) {
                const Point q = s.node(i, j);
                EXPECT_NEAR(d.values(i, j), oracle::brute_legendre(f, q.x1, q.x2, -2, 2), 1e-9);
            }
    }
}

TEST(ForwardTransform, ConcaveInputRejected) {
    const auto u = sample(unit_square(8), [](Point p) { return -p.x2 * p.x2; });
    try {
        forward_transform(u, 9);
        FAIL() << "expected TransformError";
    } catch (const TransformError& e) {
        EXPECT_EQ(e.column(), 0);
    }
    EXPECT_THROW(forward_transform(sample(unit_square(8), [](Point p) { return p.x2 * p.x2; }), 2),
                 std::invalid_argument);
}

TEST(ForwardTransform, DisjointColumnRangesRejected) {
    // p2 ranges [-2 + 10 x1, 2 + 10 x1] do not overlap across the grid
    const auto u = sample(unit_square(8), [](Point p) { return p.x2 * p.x2 + 10 * p.x1 * p.x2; });
    EXPECT_THROW(forward_transform(u, 9), TransformError);
}

TEST(ForwardTransform, ColumnGradientsStrictlyIncreasing) {
    // injectivity of x2 -> u_2 per column is exactly what the transform checks
    const FamilyParams p{1, 2, 0.5, {}};
    const auto u = sample(GridSpec::with_spacing({-1, 1, -2, 2}, 1.0 / 16), [&](Point x) { return family_eval(p, x); });
    EXPECT_NO_THROW(forward_transform(u, 33));
}

TEST(Involution, HalfSquareExact) {
    for (int n : {4, 16, 64}) {
        const auto u = sample(unit_square(n), [](Point p) { return p.x2 * p.x2 / 2; });
        EXPECT_LE(involution_check(u, 2 * n + 1), 1e-10);
    }
}

TEST(Involution, SecondOrderOnFamily) {
    for (double alpha : {0.0, 1.0, 2.0}) {
        const FamilyParams p{alpha, 1.5, 0.3, {0.1, 0.2, 0.3}};
        std::vector<double> err;
        for (int n : {32, 64, 128}) {
            const auto s = unit_square(n);
            err.push_back(involution_check(sample(s, [&](Point x) { return family_eval(p, x); }), s.ny));
        }
        EXPECT_LE(err[1], 0.35 * err[0]) << alpha;
        EXPECT_LE(err[2], 0.35 * err[1]) << alpha;
    }
}

TEST(Involution, ConstantShiftLeavesErrorUnchanged) {
    const FamilyParams p{2, 1, 0, {}};
    const auto s = unit_square(32);
    const double e0 = involution_check(sample(s, [&](Point x) { return family_eval(p, x); }), s.ny);
    const double e1 = involution_check(sample(s, [&](Point x) { return family_eval(p, x) + 3.25; }), s.ny);
    EXPECT_NEAR(e0, e1, 1e-12);
}

TEST(DualConvexity, ConvexInP2ConcaveInP1) {
    oracle::Rng rng(59);
    for (double alpha : {0.0, 1.0, 2.0}) {
        for (int k = 0; k < 4; ++k) {
            const FamilyParams p{alpha, rng.uniform(0.5, 2), rng.uniform(-0.4, 0.4), {}};
            const auto u = sample(GridSpec::with_spacing({-1, 1, -2, 2}, 1.0 / 32),
                                  [&](Point x) { return family_eval(p, x); });
            const auto d = forward_transform(u, 65);
            const auto a = d11(d.values), b = d22(d.values);
            for (int j = 1; j < d.spec().ny - 1; ++j)
                for (int i = 1; i < d.spec().nx - 1; ++i) {
                    ASSERT_GE(b(i, j), -1e-9);
                    ASSERT_LE(a(i, j), 1e-9);
                }
        }
    }
}

TEST(GrushinResidual, Examples) {
    const auto s = unit_square(32);
    const DualGridFunction affine{sample(s, [](Point q) { return 1 + 2 * q.x1 - 3 * q.x2; }), {-1, 1}};
    EXPECT_LE(grushin_residual(affine, 2.0), 1e-10);
    std::vector<double> r;
    for (int n : {16, 32, 64}) {
        const FamilyParams p{2, 1, 0, {}};
        const DualGridFunction d{sample(unit_square(n), [&](Point q) { return dual_closed_form(p, q); }), {-1, 1}};
        r.push_back(grushin_residual(d, 2.0));
    }
    // C h^2 away from the line: ratios near 1/4
    EXPECT_LE(r[1], 0.3 * r[0]);
    EXPECT_LE(r[2], 0.3 * r[1]);
    EXPECT_THROW(grushin_residual(affine, 2.0, 0), std::invalid_argument);
    EXPECT_THROW(grushin_residual(affine, 2.0, 40), std::invalid_argument);
}

TEST(GrushinResidual, ColumnExclusion) {
    const GridSpec s(-1, 1, -1, 1, 9, 9);  // h = 0.25, p1 = 0 is a node
    EXPECT_FALSE(dual_column_retained(s, 4, 2));
    EXPECT_FALSE(dual_column_retained(s, 5, 2));
    EXPECT_FALSE(dual_column_retained(s, 6, 2));
    EXPECT_TRUE(dual_column_retained(s, 7, 2));
    EXPECT_TRUE(dual_column_retained(s, 1, 2));
}

TEST(Pipeline, MaSolveThenTransformResidualDecreases) {
    const FamilyParams fam{1, 2, 0.5, {}};
    std::vector<double> r;
    for (int n : {32, 64, 128}) {
        const auto s = GridSpec::with_spacing({-1, 1, -2, 2}, 1.0 / n);
        auto [u, rep] = ma_solve_dirichlet(s, 1.0, 2.0 / n, [&](Point x) { return family_eval(fam, x); });
        ASSERT_TRUE(rep.converged);
        r.push_back(grushin_residual(forward_transform(u, s.ny), 1.0, 2));
    }
    EXPECT_LT(r[1], r[0]);
    EXPECT_LT(r[2], r[1]);
}

TEST(DualCsv, Header) {
    const DualGridFunction d{sample(unit_square(2), [](Point) { return 1.0; }), {-1, 1}};
    std::stringstream ss;
    write_csv(ss, d);
    std::string line;
    std::getline(ss, line);
    EXPECT_EQ(line, "p1,p2,ustar");
}
