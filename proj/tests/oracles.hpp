#pragma once

// Independent reference computations for the unit and acceptance tests. Nothing
// here calls into the library's numerics; only Point is shared.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "degenma/grid.hpp"

namespace oracle {

using degenma::Point;

struct Hess {
    double h11, h12, h22;
    double det() const { return h11 * h22 - h12 * h12; }
};

// Richardson-extrapolated central differences (fourth order in h).
template <class F>
Hess fd_hessian(const F& f, Point x, double h = 1e-3) {
    auto second = [&](double s) {
        const double c = f(x);
        const double a = (f({x.x1 + s, x.x2}) - 2 * c + f({x.x1 - s, x.x2})) / (s * s);
        const double b = (f({x.x1, x.x2 + s}) - 2 * c + f({x.x1, x.x2 - s})) / (s * s);
        const double m = (f({x.x1 + s, x.x2 + s}) - f({x.x1 + s, x.x2 - s}) - f({x.x1 - s, x.x2 + s}) +
                          f({x.x1 - s, x.x2 - s})) / (4 * s * s);
        return Hess{a, m, b};
    };
    const Hess c = second(h), f2 = second(0.5 * h);
    return {(4 * f2.h11 - c.h11) / 3, (4 * f2.h12 - c.h12) / 3, (4 * f2.h22 - c.h22) / 3};
}

// sup over x2 in [lo, hi] of x2 p2 - u(x1, x2) for u convex in x2: coarse scan
// followed by golden-section refinement of the best bracket.
template <class F>
double brute_legendre(const F& u, double x1, double p2, double lo, double hi, int scan = 4000) {
    auto g = [&](double x2) { return x2 * p2 - u(Point{x1, x2}); };
    int best = 0;
    double bestv = g(lo);
    for (int k = 1; k <= scan; ++k) {
        const double v = g(lo + (hi - lo) * k / scan);
        if (v > bestv) {
            bestv = v;
            best = k;
        }
    }
    double a = lo + (hi - lo) * std::max(best - 1, 0) / scan;
    double b = lo + (hi - lo) * std::min(best + 1, scan) / scan;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200; ++it) {
        const double c = b - r * (b - a), d = a + r * (b - a);
        if (g(c) > g(d)) b = d;
        else a = c;
    }
    return std::max(bestv, g(0.5 * (a + b)));
}

// Plain bisection for an increasing function on [lo, hi].
template <class F>
double bisect(const F& f, double lo, double hi, int iters = 200) {
    for (int k = 0; k < iters; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Deterministic uniform doubles for property tests.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }
    int integer(int lo, int hi) { return lo + static_cast<int>(uniform(0.0, 1.0) * (hi - lo + 1)); }

private:
    std::mt19937_64 eng_;
};

}  // namespace oracle
