#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "degenma/grid.hpp"

namespace degenma {

/// Affine function c0 + c1*x1 + c2*x2.
struct LinearPart {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double operator()(Point x) const { return c0 + c1 * x.x1 + c2 * x.x2; }
};

/// Parameters of the entire solutions of det D^2 u = |x1|^alpha:
///   u = a/((alpha+2)(alpha+1)) |x1|^(2+alpha) + a b^2/2 x1^2 + b x1 x2 + x2^2/(2a) + ell.
/// The same record parameterizes the dual family through dual_closed_form.
struct FamilyParams {
    double alpha = 0.0;
    double a = 1.0;
    double b = 0.0;
    LinearPart ell{};

    void validate() const {
        if (!(alpha > -1.0)) throw std::invalid_argument("FamilyParams: alpha must exceed -1");
        if (!(a > 0.0)) throw std::invalid_argument("FamilyParams: a must be positive");
    }
};

struct Hessian2 {
    double h11 = 0.0, h12 = 0.0, h22 = 0.0;
    double det() const { return h11 * h22 - h12 * h12; }
};

inline double abs_pow(double x, double e) { return std::pow(std::abs(x), e); }

inline double family_eval(const FamilyParams& p, Point x) {
    p.validate();
    const double al = p.alpha;
    return p.a / ((al + 2.0) * (al + 1.0)) * abs_pow(x.x1, 2.0 + al) +
           0.5 * p.a * p.b * p.b * x.x1 * x.x1 + p.b * x.x1 * x.x2 +
           x.x2 * x.x2 / (2.0 * p.a) + p.ell(x);
}

inline Hessian2 family_hessian(const FamilyParams& p, Point x) {
    p.validate();
    if (p.alpha < 0.0 && x.x1 == 0.0)
        throw std::domain_error("family_hessian: u11 unbounded on {x1 = 0} for alpha < 0");
    // |x1|^0 is 1 even at x1 = 0
    const double w = p.alpha == 0.0 ? 1.0 : abs_pow(x.x1, p.alpha);
    return {p.a * w + p.a * p.b * p.b, p.b, 1.0 / p.a};
}

inline double family_det_residual(const FamilyParams& p, Point x) {
    const Hessian2 h = family_hessian(p, x);
    const double w = p.alpha == 0.0 ? 1.0 : abs_pow(x.x1, p.alpha);
    return h.det() - w;
}

/// -a/((alpha+1)(alpha+2)) |p1|^(2+alpha) + a/2 p2^2 + b p1 p2 + ell(p).
/// Solves p -> u11 + |p1|^alpha u22 = 0 away from p1 = 0.
inline double dual_closed_form(const FamilyParams& p, Point q) {
    p.validate();
    const double al = p.alpha;
    return -p.a / ((al + 1.0) * (al + 2.0)) * abs_pow(q.x1, 2.0 + al) +
           0.5 * p.a * q.x2 * q.x2 + p.b * q.x1 * q.x2 + p.ell(q);
}

/// Parameters (a, b', ell') such that dual_closed_form(result, .) is the partial
/// Legendre transform of family_eval(p, .). The mixed coefficient becomes -a*b.
inline FamilyParams family_dual_params(const FamilyParams& p) {
    p.validate();
    const auto& l = p.ell;
    FamilyParams d;
    d.alpha = p.alpha;
    d.a = p.a;
    d.b = -p.a * p.b;
    d.ell = {0.5 * p.a * l.c2 * l.c2 - l.c0, p.a * p.b * l.c2 - l.c1, -p.a * l.c2};
    return d;
}

// ---------------------------------------------------------------------------
// Model solution phi = |x1|^(2+alpha) + x2^2.

inline double phi_eval(double alpha, Point x) {
    return abs_pow(x.x1, 2.0 + alpha) + x.x2 * x.x2;
}

inline Point phi_gradient(double alpha, Point x) {
    const double s = x.x1 > 0.0 ? 1.0 : (x.x1 < 0.0 ? -1.0 : 0.0);
    return {(2.0 + alpha) * s * abs_pow(x.x1, 1.0 + alpha), 2.0 * x.x2};
}

/// c(alpha) with det D^2 phi = c(alpha) |x1|^alpha.
inline double phi_det_coefficient(double alpha) {
    return 2.0 * (alpha + 2.0) * (alpha + 1.0);
}

// ---------------------------------------------------------------------------
// Regularized weight eta_eps.

struct RegularizerSpec {
    double alpha = 0.0;
    double eps = 0.1;

    void validate() const {
        if (!(alpha > -1.0)) throw std::invalid_argument("RegularizerSpec: alpha must exceed -1");
        if (!(eps > 0.0)) throw std::invalid_argument("RegularizerSpec: eps must be positive");
    }
};

/// |x1|^alpha for |x1| > 2 eps, eps^alpha for |x1| <= eps, and on the gap a
/// monotone C^1 cubic Hermite bridge in |x1|. The far slope is limited to
/// 3x the secant (Fritsch-Carlson) so monotonicity survives large alpha.
inline double eta_eps(const RegularizerSpec& spec, double x1) {
    const double s = std::abs(x1);
    const double e = spec.eps;
    const double al = spec.alpha;
    if (s <= e) return std::pow(e, al);
    if (s > 2.0 * e) return std::pow(s, al);
    const double y0 = std::pow(e, al);
    const double y1 = std::pow(2.0 * e, al);
    const double secant = (y1 - y0) / e;
    double m1 = al * std::pow(2.0 * e, al - 1.0);
    if (secant != 0.0 && m1 / secant > 3.0) m1 = 3.0 * secant;
    const double t = (s - e) / e;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y0 + h01 * y1 + h11 * e * m1;
}

// ---------------------------------------------------------------------------
// Sections of phi.

/// S(center, height) = { y : phi(y) < phi(center) + grad phi(center).(y - center) + height }.
struct SectionSpec {
    double alpha = 0.0;
    Point center{};
    double height = 1.0;

    void validate() const {
        if (!(alpha > -1.0)) throw std::invalid_argument("SectionSpec: alpha must exceed -1");
        if (!(height > 0.0)) throw std::invalid_argument("SectionSpec: height must be positive");
    }
};

namespace detail {
// phi(y) - support plane at the center, split into its x1 and x2 parts.
inline double section_gap_x1(const SectionSpec& s, double y1) {
    const double c = s.center.x1;
    const double f = abs_pow(y1, 2.0 + s.alpha);
    const double fc = abs_pow(c, 2.0 + s.alpha);
    const double slope = phi_gradient(s.alpha, s.center).x1;
    return f - fc - slope * (y1 - c);
}
}  // namespace detail

inline double section_defining_function(const SectionSpec& s, Point y) {
    const double dy = y.x2 - s.center.x2;
    return detail::section_gap_x1(s, y.x1) + dy * dy - s.height;
}

inline bool section_contains(const SectionSpec& s, Point y) {
    s.validate();
    return section_defining_function(s, y) < 0.0;
}

/// Open interval of y1 with section_gap_x1(y1) < level (level > 0).
inline std::pair<double, double> section_x1_interval(const SectionSpec& s, double level) {
    const double c = s.center.x1;
    auto solve_side = [&](double dir) {
        double inside = c;
        double step = 1.0;
        double outside = c + dir * step;
        while (detail::section_gap_x1(s, outside) < level) {
            inside = outside;
            step *= 2.0;
            outside = c + dir * step;
        }
        for (int k = 0; k < 200 && std::abs(outside - inside) > 1e-15 * (1.0 + std::abs(c)); ++k) {
            const double mid = 0.5 * (inside + outside);
            if (detail::section_gap_x1(s, mid) < level) inside = mid;
            else outside = mid;
        }
        return 0.5 * (inside + outside);
    };
    return {solve_side(-1.0), solve_side(1.0)};
}

inline Box section_bounding_box(const SectionSpec& s) {
    s.validate();
    const auto [lo, hi] = section_x1_interval(s, s.height);
    const double r = std::sqrt(s.height);
    return {lo, hi, s.center.x2 - r, s.center.x2 + r};
}

/// Points on the section boundary, `n` per side, parameterized by x2.
inline std::vector<Point> section_boundary_points(const SectionSpec& s, int n) {
    s.validate();
    std::vector<Point> pts;
    const double r = std::sqrt(s.height);
    for (int k = 0; k <= n; ++k) {
        const double dy = -r + 2.0 * r * k / n;
        const double level = std::max(s.height - dy * dy, 0.0);
        if (level == 0.0) {
            pts.push_back({s.center.x1, s.center.x2 + dy});
            continue;
        }
        const auto [lo, hi] = section_x1_interval(s, level);
        pts.push_back({lo, s.center.x2 + dy});
        pts.push_back({hi, s.center.x2 + dy});
    }
    return pts;
}

/// Lattice points (spacing `spacing`, aligned with the center) strictly inside.
inline std::vector<Point> section_sample_points(const SectionSpec& s, double spacing) {
    const Box bb = section_bounding_box(s);
    std::vector<Point> pts;
    const int i0 = static_cast<int>(std::floor((bb.x_lo - s.center.x1) / spacing));
    const int i1 = static_cast<int>(std::ceil((bb.x_hi - s.center.x1) / spacing));
    const int j0 = static_cast<int>(std::floor((bb.y_lo - s.center.x2) / spacing));
    const int j1 = static_cast<int>(std::ceil((bb.y_hi - s.center.x2) / spacing));
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            const Point p{s.center.x1 + i * spacing, s.center.x2 + j * spacing};
            if (section_contains(s, p)) pts.push_back(p);
        }
    return pts;
}

// ---------------------------------------------------------------------------
// Weighted measure d mu_alpha = |x1|^alpha dx.

using RegionPredicate = std::function<bool(Point)>;

namespace detail {
// Exact integral of |x|^alpha over [lo, hi].
inline double weight_integral(double alpha, double lo, double hi) {
    auto F = [alpha](double x) {
        const double v = std::pow(std::abs(x), alpha + 1.0) / (alpha + 1.0);
        return x < 0.0 ? -v : v;
    };
    return F(hi) - F(lo);
}
}  // namespace detail

/// Cell quadrature of mu_alpha(region) on a resolution x resolution partition of
/// `bbox`. A cell counts when its midpoint is in the region; its x1-weight is
/// integrated exactly, which keeps cells near {x1 = 0} accurate for alpha < 0.
inline double mu_alpha_measure(double alpha, const RegionPredicate& region,
                               const Box& bbox, int resolution) {
    if (!(alpha > -1.0)) throw std::invalid_argument("mu_alpha_measure: alpha must exceed -1");
    if (bbox.degenerate()) throw std::invalid_argument("mu_alpha_measure: degenerate bounding box");
    if (resolution < 1) throw std::invalid_argument("mu_alpha_measure: resolution must be positive");
    const double hx = (bbox.x_hi - bbox.x_lo) / resolution;
    const double hy = (bbox.y_hi - bbox.y_lo) / resolution;
    std::vector<double> column_weight(resolution);
    for (int i = 0; i < resolution; ++i) {
        const double lo = bbox.x_lo + i * hx;
        column_weight[i] = detail::weight_integral(alpha, lo, lo + hx);
    }
    double total = 0.0;
    for (int j = 0; j < resolution; ++j) {
        const double y = bbox.y_lo + (j + 0.5) * hy;
        double row = 0.0;
        for (int i = 0; i < resolution; ++i) {
            const double x = bbox.x_lo + (i + 0.5) * hx;
            if (region({x, y})) row += column_weight[i];
        }
        total += row * hy;
    }
    return total;
}

/// Ellipse centered at the origin: semi-axes along the directions rotated by `angle`.
struct Ellipse {
    double semi1 = 1.0;
    double semi2 = 1.0;
    double angle = 0.0;

    bool contains(Point d) const {
        const double c = std::cos(angle), s = std::sin(angle);
        const double u = (c * d.x1 + s * d.x2) / semi1;
        const double v = (-s * d.x1 + c * d.x2) / semi2;
        return u * u + v * v < 1.0;
    }
    Ellipse scaled(double k) const { return {k * semi1, k * semi2, angle}; }
    Box bounding_box(Point center) const {
        const double c = std::cos(angle), s = std::sin(angle);
        const double ex = std::hypot(semi1 * c, semi2 * s);
        const double ey = std::hypot(semi1 * s, semi2 * c);
        return {center.x1 - ex, center.x1 + ex, center.x2 - ey, center.x2 + ey};
    }
};

/// mu_alpha(center + E) / mu_alpha((center + 2E) cap omega).
inline double doubling_ratio(double alpha, const RegionPredicate& omega, const Box& omega_box,
                             Point center, const Ellipse& e, int resolution) {
    auto in_e = [&](Point p) { return e.contains({p.x1 - center.x1, p.x2 - center.x2}); };
    const Ellipse e2 = e.scaled(2.0);
    auto in_2e = [&](Point p) {
        return e2.contains({p.x1 - center.x1, p.x2 - center.x2}) && omega(p);
    };
    Box b2 = e2.bounding_box(center);
    b2 = {std::max(b2.x_lo, omega_box.x_lo), std::min(b2.x_hi, omega_box.x_hi),
          std::max(b2.y_lo, omega_box.y_lo), std::min(b2.y_hi, omega_box.y_hi)};
    if (b2.degenerate()) throw std::invalid_argument("doubling_ratio: center + 2E misses omega");
    const double outer = mu_alpha_measure(alpha, in_2e, b2, resolution);
    if (!(outer > 0.0)) throw std::invalid_argument("doubling_ratio: center + 2E misses omega");
    // Same resolution on E's box, which is half of 2E's: when 2E lies inside omega
    // the two quadratures are exact rescalings of each other.
    const double inner = mu_alpha_measure(alpha, in_e, e.bounding_box(center), resolution);
    return inner / outer;
}

// ---------------------------------------------------------------------------
// Anisotropic scaling u_r(x) = u(r^(1/(2+alpha)) x1, r^(1/2) x2) / r.

inline Point scaled_point(Point x, double r, double alpha) {
    return {std::pow(r, 1.0 / (2.0 + alpha)) * x.x1, std::sqrt(r) * x.x2};
}

template <class F>
auto scale_pullback(F u, double r, double alpha) {
    if (!(r > 0.0)) throw std::invalid_argument("scale_pullback: r must be positive");
    return [u = std::move(u), r, alpha](Point x) { return u(scaled_point(x, r, alpha)) / r; };
}

/// Grid version: samples u_r on `target`; every scaled node must lie in u's grid.
inline GridFunction scale_pullback(const GridFunction& u, double r, double alpha,
                                   const GridSpec& target) {
    if (!(r > 0.0)) throw std::invalid_argument("scale_pullback: r must be positive");
    return sample(target, [&](Point x) {
        return interp_bilinear(u, scaled_point(x, r, alpha)) / r;
    });
}

/// u11 + |x1|^alpha u22 at x by centered differences with steps (h1, h2).
template <class F>
double grushin_apply_fd(const F& u, double alpha, Point x, double h1, double h2) {
    const double c = u(x);
    const double u11 = (u(Point{x.x1 + h1, x.x2}) - 2.0 * c + u(Point{x.x1 - h1, x.x2})) / (h1 * h1);
    const double u22 = (u(Point{x.x1, x.x2 + h2}) - 2.0 * c + u(Point{x.x1, x.x2 - h2})) / (h2 * h2);
    const double w = alpha == 0.0 ? 1.0 : abs_pow(x.x1, alpha);
    return u11 + w * u22;
}

// ---------------------------------------------------------------------------
// Non-strictly-convex example: u = |x1|^((alpha+2)/2) w(x2) with
//   alpha(alpha+2)/4 w w'' - (alpha+2)^2/4 (w')^2 = 1,  w(0) = w'(0) = 1.

struct OdeSample {
    double t = 0.0;
    double w = 0.0;
    double dw = 0.0;
};

struct OdeTrajectory {
    double alpha = 0.0;
    double step = 0.0;
    std::vector<OdeSample> samples;
    bool truncated = false;  // stopped before t_max (blow-up guard or w <= 0)
};

inline double ode_second_derivative(double alpha, double w, double dw) {
    return 4.0 / (alpha * (alpha + 2.0)) * (1.0 + 0.25 * (alpha + 2.0) * (alpha + 2.0) * dw * dw) / w;
}

/// Classical RK4 with a fixed step. Stops early (truncated = true) once
/// w'' * step exceeds 1e3 or w leaves (0, inf).
inline OdeTrajectory ode_integrate(double alpha, double t_max, double step) {
    if (!(alpha > 0.0)) throw std::invalid_argument("ode_integrate: alpha must be positive");
    if (!(step > 0.0) || !(t_max >= 0.0))
        throw std::invalid_argument("ode_integrate: need step > 0 and t_max >= 0");
    OdeTrajectory tr{alpha, step, {}, false};
    const long n = std::lround(t_max / step);
    tr.samples.reserve(n + 1);
    OdeSample cur{0.0, 1.0, 1.0};
    tr.samples.push_back(cur);
    auto acc = [alpha](double w, double dw) { return ode_second_derivative(alpha, w, dw); };
    for (long k = 0; k < n; ++k) {
        if (ode_second_derivative(alpha, cur.w, cur.dw) * step > 1e3) {
            tr.truncated = true;
            break;
        }
        const double w = cur.w, v = cur.dw, h = step;
        const double k1w = v, k1v = acc(w, v);
        const double k2w = v + 0.5 * h * k1v, k2v = acc(w + 0.5 * h * k1w, v + 0.5 * h * k1v);
        const double k3w = v + 0.5 * h * k2v, k3v = acc(w + 0.5 * h * k2w, v + 0.5 * h * k2v);
        const double k4w = v + h * k3v, k4v = acc(w + h * k3w, v + h * k3v);
        OdeSample next{(k + 1) * step, w + h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w),
                       v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)};
        if (!(next.w > 0.0) || !std::isfinite(next.dw)) {
            tr.truncated = true;
            break;
        }
        tr.samples.push_back(next);
        cur = next;
    }
    return tr;
}

namespace detail {

// Fornberg weights for the first derivative at z from nodes x[0..m).
inline std::vector<double> first_derivative_weights(double z, const std::vector<double>& x) {
    const std::size_t m = x.size();
    std::vector<std::vector<double>> c(m, std::vector<double>(2, 0.0));
    double c1 = 1.0, c4 = x[0] - z;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < m; ++i) {
        const std::size_t mn = std::min<std::size_t>(i, 1);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(m);
    for (std::size_t i = 0; i < m; ++i) w[i] = c[i][1];
    return w;
}

}  // namespace detail

/// ODE residual at each sample, with w'' taken from eighth-order differences
/// of the stored w' (nine-point window, shifted inward near the ends).
inline std::vector<double> ode_residuals(const OdeTrajectory& tr) {
    constexpr std::size_t width = 9;
    const auto& s = tr.samples;
    const std::size_t n = s.size();
    if (n < width) throw std::invalid_argument("ode_residuals: need at least 9 samples");
    const double al = tr.alpha;
    std::vector<double> res(n);
    // weights in units of the step, one set per offset of the sample inside its window
    std::vector<double> offsets(width);
    for (std::size_t m = 0; m < width; ++m) offsets[m] = static_cast<double>(m);
    std::vector<std::vector<double>> weights(width);
    for (std::size_t m = 0; m < width; ++m) weights[m] = detail::first_derivative_weights(static_cast<double>(m), offsets);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t lo = std::min(k >= width / 2 ? k - width / 2 : 0, n - width);
        const auto& w = weights[k - lo];
        double ddw = 0.0;
        for (std::size_t m = 0; m < width; ++m) ddw += w[m] * s[lo + m].dw;
        ddw /= tr.step;
        res[k] = al * (al + 2.0) / 4.0 * s[k].w * ddw -
                 (al + 2.0) * (al + 2.0) / 4.0 * s[k].dw * s[k].dw - 1.0;
    }
    return res;
}

/// w at t by quintic Hermite interpolation on (w, w', w'') at the bracketing samples.
inline double ode_w(const OdeTrajectory& tr, double t) {
    const auto& s = tr.samples;
    if (s.empty() || t < s.front().t || t > s.back().t)
        throw std::out_of_range("ode_w: t outside the integrated window");
    if (s.size() == 1) return s.front().w;
    std::size_t k = static_cast<std::size_t>(std::floor(t / tr.step));
    if (k >= s.size() - 1) k = s.size() - 2;
    const auto& a = s[k];
    const auto& b = s[k + 1];
    const double h = b.t - a.t;
    const double x = (t - a.t) / h;
    const double x3 = x * x * x, x4 = x3 * x, x5 = x4 * x;
    const double H0 = 1 - 10 * x3 + 15 * x4 - 6 * x5;
    const double H1 = x - 6 * x3 + 8 * x4 - 3 * x5;
    const double H2 = 0.5 * x * x - 1.5 * x3 + 1.5 * x4 - 0.5 * x5;
    const double H3 = 10 * x3 - 15 * x4 + 6 * x5;
    const double H4 = -4 * x3 + 7 * x4 - 3 * x5;
    const double H5 = 0.5 * x3 - x4 + 0.5 * x5;
    const double ddwa = ode_second_derivative(tr.alpha, a.w, a.dw);
    const double ddwb = ode_second_derivative(tr.alpha, b.w, b.dw);
    return a.w * H0 + h * a.dw * H1 + h * h * ddwa * H2 + b.w * H3 + h * b.dw * H4 +
           h * h * ddwb * H5;
}

/// |x1|^((alpha+2)/2) w(x2); identically zero on {x1 = 0}.
inline double ode_solution_eval(const OdeTrajectory& tr, Point x) {
    const double w = ode_w(tr, x.x2);
    return abs_pow(x.x1, 0.5 * (tr.alpha + 2.0)) * w;
}

// ---------------------------------------------------------------------------
// Barriers for the surjectivity argument:
//   v = u*_2 - C p2 (p1 - lo)(hi - p1) - C/3 p2^3 + C/3.

enum class BarrierVariant { case1, case2 };

struct BarrierSpec {
    BarrierVariant variant = BarrierVariant::case1;
    double C = 1.0;

    // [p1_lo, p1_hi] x [0, 1)
    double p1_lo() const { return variant == BarrierVariant::case1 ? 1.0 : 0.5; }
    double p1_hi() const { return variant == BarrierVariant::case1 ? 3.0 : 1.0; }
    bool in_rectangle(Point p) const {
        return p.x1 >= p1_lo() && p.x1 <= p1_hi() && p.x2 >= 0.0 && p.x2 < 1.0;
    }
    void validate() const {
        if (!(C > 0.0)) throw std::invalid_argument("BarrierSpec: C must be positive");
    }
};

/// Polynomial part of v (everything except u*_2).
inline double barrier_poly(const BarrierSpec& spec, Point p) {
    const double C = spec.C;
    return -C * p.x2 * (p.x1 - spec.p1_lo()) * (spec.p1_hi() - p.x1) -
           C / 3.0 * p.x2 * p.x2 * p.x2 + C / 3.0;
}

/// L applied to the polynomial part, 2 C p2 (1 - |p1|^alpha).
inline double barrier_L_residual(const BarrierSpec& spec, double alpha, Point p) {
    spec.validate();
    const bool ok_alpha = spec.variant == BarrierVariant::case1 ? alpha >= 0.0
                                                                : (alpha > -1.0 && alpha < 0.0);
    if (!ok_alpha) throw std::invalid_argument("barrier_L_residual: alpha outside the variant's range");
    if (!spec.in_rectangle(p)) throw std::out_of_range("barrier_L_residual: point outside rectangle");
    const double d11 = 2.0 * spec.C * p.x2;   // (p1-lo)(hi-p1) has second derivative -2
    const double d22 = -2.0 * spec.C * p.x2;  // from -C/3 p2^3
    const double w = alpha == 0.0 ? 1.0 : abs_pow(p.x1, alpha);
    return d11 + w * d22;
}

/// Root in (0,1) of p + p^3/3 - 1/3 = 1/2 (case1) or p/16 + p^3/3 - 1/3 = 1/32 (case2).
inline double barrier_root(BarrierVariant v) {
    auto f = [v](double p) {
        return v == BarrierVariant::case1 ? p + p * p * p / 3.0 - 1.0 / 3.0 - 0.5
                                          : p / 16.0 + p * p * p / 3.0 - 1.0 / 3.0 - 1.0 / 32.0;
    };
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace degenma
