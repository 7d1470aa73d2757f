#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "degenma/grid.hpp"

namespace degenma {

/// u*(p1, p2) on a uniform (p1, p2) grid. p1 nodes are the x1 nodes of the
/// source; p2 nodes span p2_range, the interval covered by every column.
struct DualGridFunction {
    GridFunction values;
    std::pair<double, double> p2_range{0.0, 0.0};

    const GridSpec& spec() const { return values.spec(); }
};

/// Raised when a column of the source is not strictly convex in x2, or when the
/// column gradient ranges do not overlap.
class TransformError : public std::runtime_error {
public:
    TransformError(const std::string& what, int column)
        : std::runtime_error(what), column_(column) {}
    int column() const { return column_; }

private:
    int column_;
};

namespace detail {

// d/dx2 along column i: centered inside, second-order one-sided at the ends.
inline std::vector<double> column_gradient(const GridFunction& u, int i) {
    const auto& s = u.spec();
    const double h = s.hy();
    const int n = s.ny;
    std::vector<double> g(n);
    g[0] = (-3.0 * u(i, 0) + 4.0 * u(i, 1) - u(i, 2)) / (2.0 * h);
    g[n - 1] = (3.0 * u(i, n - 1) - 4.0 * u(i, n - 2) + u(i, n - 3)) / (2.0 * h);
    for (int j = 1; j < n - 1; ++j) g[j] = (u(i, j + 1) - u(i, j - 1)) / (2.0 * h);
    return g;
}

}  // namespace detail

/// Partial Legendre transform u*(x1, p2) = x2 p2 - u(x1, x2) with p2 = u_{x2}.
///
/// Per column the gradient samples p2(x2_j) are inverted piecewise linearly to
/// get x2 at each target p2; u at that x2 comes from the cubic Hermite
/// interpolant on (u_j, p2_j). Both steps are exact when u is quadratic in x2.
inline DualGridFunction forward_transform(const GridFunction& u, int np2) {
    const auto& s = u.spec();
    if (np2 < 3) throw std::invalid_argument("forward_transform: np2 must be at least 3");
    std::vector<std::vector<double>> grads(s.nx);
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < s.nx; ++i) {
        grads[i] = detail::column_gradient(u, i);
        const auto& g = grads[i];
        for (int j = 0; j + 1 < s.ny; ++j)
            if (!(g[j + 1] - g[j] > 1e-12))
                throw TransformError("forward_transform: x2-gradient not strictly increasing in column " +
                                         std::to_string(i),
                                     i);
        lo = std::max(lo, g.front());
        hi = std::min(hi, g.back());
    }
    if (!(lo < hi)) throw TransformError("forward_transform: empty p2 range", -1);

    const GridSpec dual_spec(s.x_lo, s.x_hi, lo, hi, s.nx, np2);
    GridFunction out(dual_spec);
    const double h = s.hy();
    for (int i = 0; i < s.nx; ++i) {
        const auto& g = grads[i];
        for (int k = 0; k < np2; ++k) {
            const double q = dual_spec.y(k);
            auto it = std::upper_bound(g.begin(), g.end(), q);
            int j = static_cast<int>(it - g.begin()) - 1;
            j = std::clamp(j, 0, s.ny - 2);
            const double theta = std::clamp((q - g[j]) / (g[j + 1] - g[j]), 0.0, 1.0);
            const double x2 = s.y(j) + theta * h;
            const double t2 = theta * theta, t3 = t2 * theta;
            const double uh = (2 * t3 - 3 * t2 + 1) * u(i, j) + (t3 - 2 * t2 + theta) * h * g[j] +
                              (-2 * t3 + 3 * t2) * u(i, j + 1) + (t3 - t2) * h * g[j + 1];
            out(i, k) = x2 * q - uh;
        }
    }
    return {std::move(out), {lo, hi}};
}

/// sup |(u*)* - u| over the nodes of (u*)*, with u read by bilinear interpolation.
inline double involution_check(const GridFunction& u, int np2) {
    const DualGridFunction once = forward_transform(u, np2);
    const DualGridFunction twice = forward_transform(once.values, np2);
    const auto& s = twice.spec();
    double err = 0.0;
    bool any = false;
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) {
            const Point p = s.node(i, j);
            if (!u.spec().contains(p)) continue;
            err = std::max(err, std::abs(twice.values(i, j) - interp_bilinear(u, p)));
            any = true;
        }
    if (!any) throw std::runtime_error("involution_check: no common nodes");
    return err;
}

/// True for dual columns kept by the residual and fit: |p1| >= (k + 1/2) h1,
/// which drops the column on p1 = 0 (when it is a node) and k columns per side.
inline bool dual_column_retained(const GridSpec& s, int i, int exclude_k) {
    return std::abs(s.x(i)) >= (exclude_k + 0.5) * s.hx() - 1e-12 * s.hx();
}

/// sup |d11 u* + |p1|^alpha d22 u*| over interior dual nodes away from p1 = 0.
inline double grushin_residual(const DualGridFunction& ustar, double alpha, int exclude_k = 2) {
    if (exclude_k < 1) throw std::invalid_argument("grushin_residual: exclude_k must be >= 1");
    const auto& s = ustar.spec();
    const auto& v = ustar.values;
    const double w1 = 1.0 / (s.hx() * s.hx()), w2 = 1.0 / (s.hy() * s.hy());
    double r = 0.0;
    bool any = false;
    for (int i = 1; i < s.nx - 1; ++i) {
        if (!dual_column_retained(s, i, exclude_k)) continue;
        const double weight = std::pow(std::abs(s.x(i)), alpha);
        for (int j = 1; j < s.ny - 1; ++j) {
            const double a = (v(i + 1, j) - 2.0 * v(i, j) + v(i - 1, j)) * w1;
            const double b = (v(i, j + 1) - 2.0 * v(i, j) + v(i, j - 1)) * w2;
            r = std::max(r, std::abs(a + weight * b));
            any = true;
        }
    }
    if (!any) throw std::invalid_argument("grushin_residual: grid too small after exclusion");
    return r;
}

inline void write_csv(std::ostream& os, const DualGridFunction& d) {
    write_csv(os, d.values, "p1,p2,ustar");
}

}  // namespace degenma
