#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "degenma/grid.hpp"
#include "oracles.hpp"

using namespace degenma;

namespace {

GridSpec unit_grid(int n) { return GridSpec::with_spacing({-1, 1, -1, 1}, 1.0 / n); }

double interior_sup(const GridFunction& f, double (*exact)(Point)) {
    const auto& s = f.spec();
    double m = 0.0;
    for (int j = 1; j < s.ny - 1; ++j)
        for (int i = 1; i < s.nx - 1; ++i) m = std::max(m, std::abs(f(i, j) - exact(s.node(i, j))));
    return m;
}

}  // namespace

TEST(GridSpec, RejectsEmptyRanges) {
    EXPECT_THROW(GridSpec(1, 1, 0, 1, 4, 4), std::invalid_argument);
    EXPECT_THROW(GridSpec(0, 1, 2, 1, 4, 4), std::invalid_argument);
    EXPECT_THROW(GridSpec(0, 1, 0, 1, 2, 4), std::invalid_argument);
}

TEST(GridSpec, NodesIncludeBothEndpoints) {
    const GridSpec s(-1, 2, 0, 1, 7, 5);
    EXPECT_DOUBLE_EQ(s.x(0), -1.0);
    EXPECT_EQ(s.x(6), 2.0);
    EXPECT_EQ(s.y(4), 1.0);
    EXPECT_DOUBLE_EQ(s.x(3), -1.0 + 3 * 0.5);
    EXPECT_DOUBLE_EQ(s.hy(), 0.25);
}

TEST(GridSpec, IndexRoundTrip) {
    oracle::Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const GridSpec s(0, 1, 0, 1, rng.integer(3, 40), rng.integer(3, 40));
        for (int j = 0; j < s.ny; ++j)
            for (int i = 0; i < s.nx; ++i) {
                const auto [ii, jj] = s.unflatten(s.index(i, j));
                ASSERT_EQ(ii, i);
                ASSERT_EQ(jj, j);
            }
    }
}

TEST(GridFunction, RejectsWrongValueCount) {
    EXPECT_THROW(GridFunction(unit_grid(4), std::vector<double>(3, 0.0)), std::invalid_argument);
}

TEST(SecondDifferences, ExamplesOnSimplePolynomials) {
    const auto s = unit_grid(8);
    const auto sq = sample(s, [](Point p) { return p.x1 * p.x1; });
    const auto xy = sample(s, [](Point p) { return p.x1 * p.x2; });
    const auto c = sample(s, [](Point) { return 4.2; });
    for (int j = 1; j < s.ny - 1; ++j)
        for (int i = 1; i < s.nx - 1; ++i) {
            EXPECT_NEAR(d11(sq)(i, j), 2.0, 1e-12);
            EXPECT_NEAR(d12(xy)(i, j), 1.0, 1e-12);
            EXPECT_EQ(d11(c)(i, j), 0.0);
            EXPECT_EQ(d22(c)(i, j), 0.0);
            EXPECT_EQ(d12(c)(i, j), 0.0);
        }
    EXPECT_TRUE(std::isnan(d11(sq)(0, 3)));
}

TEST(SecondDifferences, ExactOnRandomQuadratics) {
    oracle::Rng rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        double q[6];
        for (double& v : q) v = rng.uniform(-3, 3);
        const GridSpec s(rng.uniform(-2, -1), rng.uniform(1, 2), rng.uniform(-2, -1), rng.uniform(1, 2),
                         rng.integer(5, 30), rng.integer(5, 30));
        const auto u = sample(s, [&](Point p) {
            return q[0] + q[1] * p.x1 + q[2] * p.x2 + q[3] * p.x1 * p.x1 + q[4] * p.x1 * p.x2 + q[5] * p.x2 * p.x2;
        });
        const auto a = d11(u), b = d22(u), c = d12(u);
        for (int j = 1; j < s.ny - 1; ++j)
            for (int i = 1; i < s.nx - 1; ++i) {
                ASSERT_NEAR(a(i, j), 2 * q[3], 1e-13 * 4e2);
                ASSERT_NEAR(b(i, j), 2 * q[5], 1e-13 * 4e2);
                ASSERT_NEAR(c(i, j), q[4], 1e-13 * 4e2);
            }
    }
}

TEST(SecondDifferences, SecondOrderConvergence) {
    auto exact = [](Point p) { return -std::sin(p.x1) * std::sin(p.x2); };
    std::vector<double> err;
    for (int n : {32, 64, 128}) {
        const auto u = sample(unit_grid(n), [](Point p) { return std::sin(p.x1) * std::sin(p.x2); });
        err.push_back(interior_sup(d11(u), +exact));
    }
    for (std::size_t k = 1; k < err.size(); ++k) EXPECT_GE(std::log2(err[k - 1] / err[k]), 1.9);
}

TEST(Norms, ConstantField) {
    const auto u = sample(unit_grid(8), [](Point) { return 3.0; });
    EXPECT_EQ(sup_norm(u), 3.0);
    const std::vector<PointPair> pairs{{{0, 0}, {0.5, 0.5}}, {{-0.3, 0.2}, {0.1, 0.9}}};
    EXPECT_EQ(holder_seminorm(u, 0.5, pairs), 0.0);
}

TEST(Norms, SupNormMaskAndEmpty) {
    const auto s = unit_grid(4);
    const auto u = sample(s, [](Point p) { return p.x1; });
    EXPECT_EQ(sup_norm(u, [](int i, int) { return i == 4; }), 0.0);
    EXPECT_THROW(sup_norm(u, [](int, int) { return false; }), std::invalid_argument);
}

TEST(Norms, HolderSinglePairQuotient) {
    const auto u = sample(unit_grid(16), [](Point p) { return p.x2; });
    const std::vector<PointPair> pairs{{{0, 0}, {0, 0.25}}};
    EXPECT_NEAR(holder_seminorm(u, 0.5, pairs), 0.5, 1e-14);
}

TEST(Norms, HolderMonotoneInSample) {
    const auto u = sample(unit_grid(16), [](Point p) { return std::sin(3 * p.x1) + p.x2 * p.x2; });
    oracle::Rng rng(3);
    std::vector<PointPair> pairs;
    double prev = 0.0;
    for (int k = 0; k < 40; ++k) {
        pairs.push_back({{rng.uniform(-1, 1), rng.uniform(-1, 1)}, {rng.uniform(-1, 1), rng.uniform(-1, 1)}});
        const double v = holder_seminorm(u, 0.5, pairs);
        EXPECT_GE(v, prev);
        prev = v;
    }
    EXPECT_THROW(holder_seminorm(u, 1.0, pairs), std::invalid_argument);
}

TEST(Interpolation, BilinearExamples) {
    const auto s = unit_grid(3);
    const auto u = sample(s, [](Point p) { return p.x1 * p.x2; });
    EXPECT_NEAR(interp_bilinear(u, {0.5, 0.5}), 0.25, 1e-15);
    const auto v = sample(s, [](Point p) { return std::exp(p.x1 - p.x2); });
    EXPECT_EQ(interp_bilinear(v, s.node(2, 4)), v(2, 4));
    const double h = s.hx();
    const auto sq = sample(s, [](Point p) { return p.x1 * p.x1; });
    const double xm = s.x(1) + 0.5 * h;
    EXPECT_NEAR(interp_bilinear(sq, {xm, 0.1}), xm * xm + h * h / 4, 1e-14);
    EXPECT_THROW(interp_bilinear(u, {1.5, 0.0}), std::out_of_range);
}

TEST(Csv, RoundTrip) {
    const GridSpec s(-1, 2, 0, 1.5, 7, 4);
    const auto u = sample(s, [](Point p) { return std::cos(p.x1) / 3 + p.x2; });
    std::stringstream ss;
    write_csv(ss, u);
    const auto back = read_csv(ss);
    EXPECT_EQ(back.spec(), s);
    for (std::size_t k = 0; k < s.size(); ++k) EXPECT_EQ(back.values()[k], u.values()[k]);
}
