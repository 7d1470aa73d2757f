#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace degenma {

struct Point {
    double x1 = 0.0;
    double x2 = 0.0;
};

/// Axis-aligned rectangle [x_lo, x_hi] x [y_lo, y_hi].
struct Box {
    double x_lo = 0.0, x_hi = 0.0;
    double y_lo = 0.0, y_hi = 0.0;

    bool degenerate() const { return !(x_lo < x_hi) || !(y_lo < y_hi); }
    bool contains(Point p) const {
        return p.x1 >= x_lo && p.x1 <= x_hi && p.x2 >= y_lo && p.x2 <= y_hi;
    }
};

/// Node-centered uniform grid. Node (i,j) sits at (x_lo + i*hx, y_lo + j*hy);
/// both endpoints are nodes, so boundary data lives on the outer ring.
struct GridSpec {
    double x_lo = -1.0, x_hi = 1.0;
    double y_lo = -1.0, y_hi = 1.0;
    int nx = 3, ny = 3;

    GridSpec() = default;
    GridSpec(double xl, double xh, double yl, double yh, int nx_, int ny_)
        : x_lo(xl), x_hi(xh), y_lo(yl), y_hi(yh), nx(nx_), ny(ny_) {
        validate();
    }

    /// Square-cell grid of spacing h on a box whose sides are multiples of h.
    static GridSpec with_spacing(const Box& box, double h) {
        const int nx = static_cast<int>(std::lround((box.x_hi - box.x_lo) / h)) + 1;
        const int ny = static_cast<int>(std::lround((box.y_hi - box.y_lo) / h)) + 1;
        return GridSpec(box.x_lo, box.x_hi, box.y_lo, box.y_hi, nx, ny);
    }

    void validate() const {
        if (!(x_lo < x_hi) || !(y_lo < y_hi))
            throw std::invalid_argument("GridSpec: empty coordinate range");
        if (nx < 3 || ny < 3)
            throw std::invalid_argument("GridSpec: need at least 3 nodes per direction");
    }

    double hx() const { return (x_hi - x_lo) / (nx - 1); }
    double hy() const { return (y_hi - y_lo) / (ny - 1); }
    double x(int i) const { return i == nx - 1 ? x_hi : x_lo + i * hx(); }
    double y(int j) const { return j == ny - 1 ? y_hi : y_lo + j * hy(); }
    Point node(int i, int j) const { return {x(i), y(j)}; }
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * nx + i;
    }
    std::pair<int, int> unflatten(std::size_t k) const {
        return {static_cast<int>(k % nx), static_cast<int>(k / nx)};
    }
    bool on_boundary(int i, int j) const {
        return i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
    }
    Box box() const { return {x_lo, x_hi, y_lo, y_hi}; }
    bool contains(Point p) const { return box().contains(p); }

    bool operator==(const GridSpec&) const = default;
};

/// Scalar field sampled at the nodes of a GridSpec, row-major with x1 fastest.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(GridSpec spec, double fill = 0.0)
        : spec_(spec), values_(spec.size(), fill) {
        spec_.validate();
    }
    GridFunction(GridSpec spec, std::vector<double> values)
        : spec_(spec), values_(std::move(values)) {
        spec_.validate();
        if (values_.size() != spec_.size())
            throw std::invalid_argument("GridFunction: value count does not match grid");
    }

    const GridSpec& spec() const { return spec_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    double operator()(int i, int j) const { return values_[spec_.index(i, j)]; }
    double& operator()(int i, int j) { return values_[spec_.index(i, j)]; }

    bool all_finite() const {
        return std::all_of(values_.begin(), values_.end(),
                           [](double v) { return std::isfinite(v); });
    }

private:
    GridSpec spec_;
    std::vector<double> values_;
};

template <class F>
GridFunction sample(const GridSpec& spec, F&& f) {
    GridFunction out(spec);
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) out(i, j) = f(spec.node(i, j));
    return out;
}

// Second differences. The boundary ring has no centered stencil and is set to NaN.

inline GridFunction d11(const GridFunction& u) {
    const auto& s = u.spec();
    const double w = 1.0 / (s.hx() * s.hx());
    GridFunction out(s, std::numeric_limits<double>::quiet_NaN());
    for (int j = 1; j < s.ny - 1; ++j)
        for (int i = 1; i < s.nx - 1; ++i)
            out(i, j) = (u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j)) * w;
    return out;
}

inline GridFunction d22(const GridFunction& u) {
    const auto& s = u.spec();
    const double w = 1.0 / (s.hy() * s.hy());
    GridFunction out(s, std::numeric_limits<double>::quiet_NaN());
    for (int j = 1; j < s.ny - 1; ++j)
        for (int i = 1; i < s.nx - 1; ++i)
            out(i, j) = (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1)) * w;
    return out;
}

inline GridFunction d12(const GridFunction& u) {
    const auto& s = u.spec();
    const double w = 1.0 / (4.0 * s.hx() * s.hy());
    GridFunction out(s, std::numeric_limits<double>::quiet_NaN());
    for (int j = 1; j < s.ny - 1; ++j)
        for (int i = 1; i < s.nx - 1; ++i)
            out(i, j) = (u(i + 1, j + 1) - u(i + 1, j - 1) - u(i - 1, j + 1) +
                         u(i - 1, j - 1)) * w;
    return out;
}

/// Sup of |u| over nodes where `mask` holds (all nodes when empty). NaN entries
/// are skipped. Throws when no node qualifies.
inline double sup_norm(const GridFunction& u,
                       const std::function<bool(int, int)>& mask = {}) {
    const auto& s = u.spec();
    double best = 0.0;
    bool any = false;
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) {
            if (mask && !mask(i, j)) continue;
            const double v = u(i, j);
            if (std::isnan(v)) continue;
            any = true;
            best = std::max(best, std::abs(v));
        }
    if (!any) throw std::invalid_argument("sup_norm: empty mask");
    return best;
}

/// Bilinear interpolation; exact on c0 + c1 x1 + c2 x2 + c3 x1 x2.
inline double interp_bilinear(const GridFunction& u, Point p) {
    const auto& s = u.spec();
    if (!s.contains(p)) {
        std::ostringstream msg;
        msg << "interp_bilinear: point (" << p.x1 << ", " << p.x2 << ") outside grid";
        throw std::out_of_range(msg.str());
    }
    const double fx = (p.x1 - s.x_lo) / s.hx();
    const double fy = (p.x2 - s.y_lo) / s.hy();
    const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, s.nx - 2);
    const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, s.ny - 2);
    const double tx = fx - i;
    const double ty = fy - j;
    return (1 - tx) * (1 - ty) * u(i, j) + tx * (1 - ty) * u(i + 1, j) +
           (1 - tx) * ty * u(i, j + 1) + tx * ty * u(i + 1, j + 1);
}

using PointPair = std::pair<Point, Point>;

/// Max of |u(x) - u(y)| / |x - y|^gamma over the given pairs.
inline double holder_seminorm(const GridFunction& u, double gamma,
                              std::span<const PointPair> pairs) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("holder_seminorm: gamma must lie in (0,1)");
    if (pairs.empty()) throw std::invalid_argument("holder_seminorm: empty sample");
    double best = 0.0;
    for (const auto& [x, y] : pairs) {
        const double dist = std::hypot(x.x1 - y.x1, x.x2 - y.x2);
        if (dist == 0.0) continue;
        const double q = std::abs(interp_bilinear(u, x) - interp_bilinear(u, y)) /
                         std::pow(dist, gamma);
        best = std::max(best, q);
    }
    return best;
}

/// Writes "x1,x2,value" rows in row-major order with 17 significant digits.
inline void write_csv(std::ostream& os, const GridFunction& u,
                      const char* header = "x1,x2,value") {
    const auto& s = u.spec();
    os << header << '\n';
    char buf[96];
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.x(i), s.y(j), u(i, j));
            os << buf;
        }
}

/// Reads the format produced by write_csv. Node coordinates must form a
/// uniform row-major grid; the header line is skipped.
inline GridFunction read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_csv: empty input");
    std::vector<double> xs, ys, vs;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        double x, y, v;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &v) != 3)
            throw std::runtime_error("read_csv: malformed row '" + line + "'");
        xs.push_back(x);
        ys.push_back(y);
        vs.push_back(v);
    }
    if (vs.empty()) throw std::runtime_error("read_csv: no rows");
    int nx = 1;
    while (nx < static_cast<int>(ys.size()) && ys[nx] == ys[0]) ++nx;
    if (vs.size() % nx != 0) throw std::runtime_error("read_csv: ragged grid");
    const int ny = static_cast<int>(vs.size() / nx);
    GridSpec spec(xs.front(), xs[nx - 1], ys.front(), ys.back(), nx, ny);
    return GridFunction(spec, std::move(vs));
}

}  // namespace degenma
