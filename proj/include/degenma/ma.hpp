#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <type_traits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "degenma/analytic.hpp"
#include "degenma/grid.hpp"
#include "degenma/grushin.hpp"

namespace degenma {

struct MaConfig {
    int max_iterations = 5000;
    double fixed_point_tolerance = 1e-10;  // sup |P - u^n|
    double damping = 1.0;
    double poisson_tolerance = 1e-11;      // relative residual of each Poisson solve
    double newton_switch = 1e-3;           // hand over to Newton once sup |P - u^n| is below this
    int max_newton = 40;                   // 0 disables the Newton stage

    void validate() const {
        if (max_iterations < 1) throw std::invalid_argument("MaConfig: max_iterations must be positive");
        if (max_newton < 0) throw std::invalid_argument("MaConfig: max_newton must be non-negative");
        if (!(fixed_point_tolerance > 0.0) || !(poisson_tolerance > 0.0))
            throw std::invalid_argument("MaConfig: tolerances must be positive");
        if (!(damping > 0.0 && damping <= 1.0))
            throw std::invalid_argument("MaConfig: damping must lie in (0,1]");
    }
};

/// Dirichlet Poisson solver on the interior nodes (factorized once).
class PoissonSolver {
public:
    explicit PoissonSolver(const GridSpec& spec) : spec_(spec) {
        nix_ = spec.nx - 2;
        niy_ = spec.ny - 2;
        cx_ = 1.0 / (spec.hx() * spec.hx());
        cy_ = 1.0 / (spec.hy() * spec.hy());
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(nix_) * niy_ * 5);
        // -Delta_h is symmetric positive definite
        for (int j = 1; j <= niy_; ++j)
            for (int i = 1; i <= nix_; ++i) {
                const int row = unknown(i, j);
                trip.emplace_back(row, row, 2.0 * cx_ + 2.0 * cy_);
                if (i > 1) trip.emplace_back(row, unknown(i - 1, j), -cx_);
                if (i < nix_) trip.emplace_back(row, unknown(i + 1, j), -cx_);
                if (j > 1) trip.emplace_back(row, unknown(i, j - 1), -cy_);
                if (j < niy_) trip.emplace_back(row, unknown(i, j + 1), -cy_);
            }
        matrix_.resize(nix_ * niy_, nix_ * niy_);
        matrix_.setFromTriplets(trip.begin(), trip.end());
        ldlt_.compute(matrix_);
        if (ldlt_.info() != Eigen::Success) throw std::runtime_error("PoissonSolver: factorization failed");
    }

    /// Solves Delta_h P = source on the interior with P = g on the boundary ring.
    /// Returns the relative residual reached.
    double solve(const GridFunction& source, const GridFunction& g, GridFunction& out) const {
        Eigen::VectorXd rhs(nix_ * niy_);
        for (int j = 1; j <= niy_; ++j)
            for (int i = 1; i <= nix_; ++i) {
                double b = -source(i, j);
                if (i == 1) b += cx_ * g(0, j);
                if (i == nix_) b += cx_ * g(spec_.nx - 1, j);
                if (j == 1) b += cy_ * g(i, 0);
                if (j == niy_) b += cy_ * g(i, spec_.ny - 1);
                rhs[unknown(i, j)] = b;
            }
        Eigen::VectorXd x = ldlt_.solve(rhs);
        const double scale = std::max(rhs.lpNorm<Eigen::Infinity>(), 1.0);
        double rel = (rhs - matrix_ * x).lpNorm<Eigen::Infinity>() / scale;
        for (int k = 0; k < 3 && rel > 1e-14; ++k) {
            x += ldlt_.solve(rhs - matrix_ * x);
            rel = (rhs - matrix_ * x).lpNorm<Eigen::Infinity>() / scale;
        }
        out = g;
        for (int j = 1; j <= niy_; ++j)
            for (int i = 1; i <= nix_; ++i) out(i, j) = x[unknown(i, j)];
        return rel;
    }

private:
    int unknown(int i, int j) const { return (j - 1) * nix_ + (i - 1); }

    GridSpec spec_;
    int nix_ = 0, niy_ = 0;
    double cx_ = 0.0, cy_ = 0.0;
    Eigen::SparseMatrix<double> matrix_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

/// Interior field d11 d22 - d12^2 - eta_eps(x1); NaN on the boundary ring.
inline GridFunction ma_residual(const GridFunction& u, double alpha, double eps) {
    const RegularizerSpec reg{alpha, eps};
    reg.validate();
    const auto a = d11(u), b = d22(u), c = d12(u);
    GridFunction out(u.spec(), std::numeric_limits<double>::quiet_NaN());
    const auto& s = u.spec();
    for (int j = 1; j < s.ny - 1; ++j)
        for (int i = 1; i < s.nx - 1; ++i)
            out(i, j) = a(i, j) * b(i, j) - c(i, j) * c(i, j) - eta_eps(reg, s.x(i));
    return out;
}

/// Sup over interior nodes of |Delta_h u - sqrt((d11-d22)^2 + 4 d12^2 + 4 eta)|.
inline double ma_fixed_point_residual(const GridFunction& u, double alpha, double eps) {
    const RegularizerSpec reg{alpha, eps};
    const auto a = d11(u), b = d22(u), c = d12(u);
    const auto& s = u.spec();
    double r = 0.0;
    for (int j = 1; j < s.ny - 1; ++j)
        for (int i = 1; i < s.nx - 1; ++i) {
            const double diff = a(i, j) - b(i, j);
            const double root = std::sqrt(diff * diff + 4.0 * c(i, j) * c(i, j) +
                                          4.0 * eta_eps(reg, s.x(i)));
            r = std::max(r, std::abs(a(i, j) + b(i, j) - root));
        }
    return r;
}

/// Smallest of d11, d22 and d11 d22 - d12^2 over interior nodes. Discrete
/// convexity up to slack delta means this is >= -delta.
inline double discrete_convexity_margin(const GridFunction& u) {
    const auto a = d11(u), b = d22(u), c = d12(u);
    const auto& s = u.spec();
    double m = std::numeric_limits<double>::infinity();
    for (int j = 1; j < s.ny - 1; ++j)
        for (int i = 1; i < s.nx - 1; ++i)
            m = std::min({m, a(i, j), b(i, j), a(i, j) * b(i, j) - c(i, j) * c(i, j)});
    return m;
}

namespace detail {

struct MaStencil {
    double a, b, c, root;
};

inline MaStencil ma_stencil(const GridFunction& u, int i, int j, double f) {
    const auto& s = u.spec();
    const double a = (u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j)) / (s.hx() * s.hx());
    const double b = (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1)) / (s.hy() * s.hy());
    const double c = (u(i + 1, j + 1) - u(i + 1, j - 1) - u(i - 1, j + 1) + u(i - 1, j - 1)) /
                     (4.0 * s.hx() * s.hy());
    return {a, b, c, std::sqrt((a - b) * (a - b) + 4.0 * c * c + 4.0 * f)};
}

// Convex-branch residual a + b - sqrt((a-b)^2 + 4c^2 + 4f) on the interior.
inline double ma_branch_residual(const GridFunction& u, const std::vector<double>& f, Eigen::VectorXd& r) {
    const auto& s = u.spec();
    const int nix = s.nx - 2;
    r.resize(static_cast<Eigen::Index>(nix) * (s.ny - 2));
    double sup = 0.0;
    for (int j = 1; j < s.ny - 1; ++j)
        for (int i = 1; i < s.nx - 1; ++i) {
            const MaStencil m = ma_stencil(u, i, j, f[i]);
            const double v = m.a + m.b - m.root;
            r[(j - 1) * nix + (i - 1)] = v;
            sup = std::max(sup, std::abs(v));
        }
    return sup;
}

// One Newton step on the convex-branch residual with backtracking on its sup
// norm. Returns false when no step reduces it.
inline bool ma_newton_step(GridFunction& u, const std::vector<double>& f) {
    const auto& s = u.spec();
    const int nix = s.nx - 2, niy = s.ny - 2;
    const double hx2 = 1.0 / (s.hx() * s.hx()), hy2 = 1.0 / (s.hy() * s.hy());
    const double hxy = 1.0 / (4.0 * s.hx() * s.hy());
    auto unknown = [nix](int i, int j) { return (j - 1) * nix + (i - 1); };
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(nix) * niy * 9);
    for (int j = 1; j <= niy; ++j)
        for (int i = 1; i <= nix; ++i) {
            const MaStencil m = ma_stencil(u, i, j, f[i]);
            const double ka = 1.0 - (m.a - m.b) / m.root;  // both in [0, 2]
            const double kb = 1.0 + (m.a - m.b) / m.root;
            const double kc = -4.0 * m.c / m.root;
            const int row = unknown(i, j);
            auto add = [&](int ii, int jj, double w) {
                if (ii >= 1 && ii <= nix && jj >= 1 && jj <= niy) trip.emplace_back(row, unknown(ii, jj), w);
            };
            add(i, j, -2.0 * ka * hx2 - 2.0 * kb * hy2);
            add(i - 1, j, ka * hx2);
            add(i + 1, j, ka * hx2);
            add(i, j - 1, kb * hy2);
            add(i, j + 1, kb * hy2);
            add(i + 1, j + 1, kc * hxy);
            add(i - 1, j - 1, kc * hxy);
            add(i + 1, j - 1, -kc * hxy);
            add(i - 1, j + 1, -kc * hxy);
        }
    Eigen::SparseMatrix<double> jac(nix * niy, nix * niy);
    jac.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(jac);
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) return false;
    Eigen::VectorXd r;
    const double r0 = ma_branch_residual(u, f, r);
    const Eigen::VectorXd du = lu.solve(-r);
    if (lu.info() != Eigen::Success || !du.allFinite()) return false;
    GridFunction trial = u;
    for (double t = 1.0; t >= 1.0 / 64.0; t *= 0.5) {
        for (int j = 1; j <= niy; ++j)
            for (int i = 1; i <= nix; ++i) trial(i, j) = u(i, j) + t * du[unknown(i, j)];
        if (ma_branch_residual(trial, f, r) < r0) {
            u = std::move(trial);
            return true;
        }
    }
    return false;
}

}  // namespace detail

/// Solves det D^2 u = eta_eps(x1) with u = g on the boundary through the 2D
/// identity Delta u = sqrt((u11 - u22)^2 + 4 u12^2 + 4 f): each sweep solves a
/// Poisson problem for P and relaxes u toward it. Once sup |P - u| drops below
/// newton_switch, Newton steps on the same discrete operator take over (the
/// sweep alone is slow where eta_eps is small). Converged when both
/// sup |P - u| <= tol and the identity residual <= 10 tol.
inline std::pair<GridFunction, SolveReport> ma_solve_dirichlet(const GridSpec& spec, double alpha,
                                                               double eps, const GridFunction& g,
                                                               const MaConfig& cfg = {}) {
    cfg.validate();
    const RegularizerSpec reg{alpha, eps};
    reg.validate();
    if (!(g.spec() == spec)) throw std::invalid_argument("ma_solve_dirichlet: grid mismatch");
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i)
            if (spec.on_boundary(i, j) && !std::isfinite(g(i, j)))
                throw std::invalid_argument("ma_solve_dirichlet: non-finite boundary data");

    std::vector<double> f(spec.nx);
    for (int i = 0; i < spec.nx; ++i) f[i] = eta_eps(reg, spec.x(i));

    const PoissonSolver poisson(spec);
    GridFunction source(spec, 0.0);
    // Warm start from Delta u >= 2 sqrt(det D^2 u).
    for (int j = 1; j < spec.ny - 1; ++j)
        for (int i = 1; i < spec.nx - 1; ++i) source(i, j) = 2.0 * std::sqrt(f[i]);
    GridFunction u(spec), p(spec);
    poisson.solve(source, g, u);

    const double hx2 = 1.0 / (spec.hx() * spec.hx());
    const double hy2 = 1.0 / (spec.hy() * spec.hy());
    const double hxy = 1.0 / (4.0 * spec.hx() * spec.hy());

    SolveReport rep;
    double damping = cfg.damping;
    double last_update = std::numeric_limits<double>::infinity();
    int newton_steps = 0;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        double identity_res = 0.0;
        for (int j = 1; j < spec.ny - 1; ++j)
            for (int i = 1; i < spec.nx - 1; ++i) {
                const double a = (u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j)) * hx2;
                const double b = (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1)) * hy2;
                const double c = (u(i + 1, j + 1) - u(i + 1, j - 1) - u(i - 1, j + 1) +
                                  u(i - 1, j - 1)) * hxy;
                const double root = std::sqrt((a - b) * (a - b) + 4.0 * c * c + 4.0 * f[i]);
                source(i, j) = root;
                identity_res = std::max(identity_res, std::abs(a + b - root));
            }
        const double rel = poisson.solve(source, g, p);
        if (rel > cfg.poisson_tolerance) {
            rep.iterations = it;
            rep.message = "Poisson sub-solve missed its tolerance";
            break;
        }
        double update = 0.0;
        for (std::size_t k = 0; k < spec.size(); ++k)
            update = std::max(update, std::abs(p.values()[k] - u.values()[k]));
        rep.iterations = it;
        if (update <= cfg.fixed_point_tolerance && identity_res <= 10.0 * cfg.fixed_point_tolerance) {
            rep.converged = true;
            break;
        }
        if (!std::isfinite(update)) {
            rep.message = "fixed-point iteration diverged";
            break;
        }
        if (update <= cfg.newton_switch && newton_steps < cfg.max_newton) {
            ++newton_steps;
            if (detail::ma_newton_step(u, f)) continue;
            newton_steps = cfg.max_newton;  // Newton stalled: finish with sweeps
        }
        if (update > last_update && damping > 0.125) damping = std::max(0.125, 0.5 * damping);
        last_update = update;
        for (std::size_t k = 0; k < spec.size(); ++k)
            u.values()[k] += damping * (p.values()[k] - u.values()[k]);
    }
    if (!rep.converged && rep.message.empty()) rep.message = "max_iterations reached";

    rep.final_residual = sup_norm(ma_residual(u, alpha, eps));
    double gmax = -std::numeric_limits<double>::infinity(), umax = gmax;
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) {
            umax = std::max(umax, u(i, j));
            if (spec.on_boundary(i, j)) gmax = std::max(gmax, g(i, j));
        }
    rep.max_principle_margin = gmax - umax;
    return {std::move(u), rep};
}

template <class F>
    requires std::is_invocable_r_v<double, F, Point>
std::pair<GridFunction, SolveReport> ma_solve_dirichlet(const GridSpec& spec, double alpha, double eps,
                                                        F&& g, const MaConfig& cfg = {}) {
    return ma_solve_dirichlet(spec, alpha, eps, sample(spec, std::forward<F>(g)), cfg);
}

/// Checks 0 <= u <= (phi - tau)/sqrt(c(alpha)) + m on the nodes strictly inside
/// S_phi(0, tau), with m = max of u on the section boundary. When m is not
/// supplied it is taken from bilinear samples of u along the boundary curve.
inline bool comparison_check(const GridFunction& u, double alpha, double tau,
                             std::optional<double> boundary_max = std::nullopt,
                             double tol = 1e-9) {
    const SectionSpec sec{alpha, {0.0, 0.0}, tau};
    detail::require_section_in_grid(u.spec(), sec, "comparison_check");
    double m = 0.0;
    if (boundary_max) {
        m = *boundary_max;
    } else {
        m = -std::numeric_limits<double>::infinity();
        for (const Point& q : section_boundary_points(sec, 512)) m = std::max(m, interp_bilinear(u, q));
    }
    const double k = 1.0 / std::sqrt(phi_det_coefficient(alpha));
    bool ok = true;
    detail::for_nodes_in_section(u.spec(), sec, [&](int i, int j) {
        const double v = u(i, j);
        const double upper = k * (phi_eval(alpha, u.spec().node(i, j)) - tau) + m;
        if (v < -tol || v > upper + tol) ok = false;
    });
    return ok;
}

}  // namespace degenma
