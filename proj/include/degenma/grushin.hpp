#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "degenma/analytic.hpp"
#include "degenma/grid.hpp"

namespace degenma {

struct SolveReport {
    int iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
    /// min(max g - max u, min u - min g) for the Grushin solver; the MA solver
    /// reports only max g - max u (convex functions obey the upper bound alone).
    double max_principle_margin = 0.0;
    std::string message;
};

struct GrushinOptions {
    double tolerance = 1e-10;  // sup of the discrete operator applied to the solution
    int max_refinements = 4;   // iterative-refinement sweeps after the LU solve
};

/// Discrete L_eps u = u11 + eta_eps(x1) u22 with the 5-point stencil and
/// Dirichlet data on the boundary ring. Positive off-diagonal weights and a
/// dominant diagonal make it an M-matrix, so the discrete maximum principle holds.
///
/// The LU factorization is built once; solve() can be called for any number of
/// boundary data on the same grid.
class GrushinSolver {
public:
    GrushinSolver(const GridSpec& spec, double alpha, double eps, GrushinOptions opts = {})
        : spec_(spec), reg_{alpha, eps}, opts_(opts) {
        spec_.validate();
        reg_.validate();
        nix_ = spec_.nx - 2;
        niy_ = spec_.ny - 2;
        cx_ = 1.0 / (spec_.hx() * spec_.hx());
        const double hy2 = spec_.hy() * spec_.hy();
        cy_.resize(spec_.nx);
        for (int i = 0; i < spec_.nx; ++i) cy_[i] = eta_eps(reg_, spec_.x(i)) / hy2;

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(nix_) * niy_ * 5);
        for (int j = 1; j <= niy_; ++j)
            for (int i = 1; i <= nix_; ++i) {
                const int row = unknown(i, j);
                trip.emplace_back(row, row, -2.0 * cx_ - 2.0 * cy_[i]);
                if (i > 1) trip.emplace_back(row, unknown(i - 1, j), cx_);
                if (i < nix_) trip.emplace_back(row, unknown(i + 1, j), cx_);
                if (j > 1) trip.emplace_back(row, unknown(i, j - 1), cy_[i]);
                if (j < niy_) trip.emplace_back(row, unknown(i, j + 1), cy_[i]);
            }
        matrix_.resize(nix_ * niy_, nix_ * niy_);
        matrix_.setFromTriplets(trip.begin(), trip.end());
        matrix_.makeCompressed();
        lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
        lu_->analyzePattern(matrix_);
        lu_->factorize(matrix_);
        if (lu_->info() != Eigen::Success)
            throw std::runtime_error("GrushinSolver: factorization failed");
    }

    const GridSpec& spec() const { return spec_; }
    const RegularizerSpec& regularizer() const { return reg_; }

    /// Solves with g's boundary ring as Dirichlet data (interior values of g ignored).
    std::pair<GridFunction, SolveReport> solve(const GridFunction& g) const {
        if (!(g.spec() == spec_)) throw std::invalid_argument("GrushinSolver: grid mismatch");
        for (int j = 0; j < spec_.ny; ++j)
            for (int i = 0; i < spec_.nx; ++i)
                if (spec_.on_boundary(i, j) && !std::isfinite(g(i, j)))
                    throw std::invalid_argument("GrushinSolver: non-finite boundary data");

        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nix_ * niy_);
        for (int j = 1; j <= niy_; ++j)
            for (int i = 1; i <= nix_; ++i) {
                double b = 0.0;
                if (i == 1) b -= cx_ * g(0, j);
                if (i == nix_) b -= cx_ * g(spec_.nx - 1, j);
                if (j == 1) b -= cy_[i] * g(i, 0);
                if (j == niy_) b -= cy_[i] * g(i, spec_.ny - 1);
                rhs[unknown(i, j)] = b;
            }
        Eigen::VectorXd x = lu_->solve(rhs);
        SolveReport rep;
        rep.iterations = 1;
        double res = (rhs - matrix_ * x).lpNorm<Eigen::Infinity>();
        for (int k = 0; k < opts_.max_refinements && res > opts_.tolerance; ++k) {
            x += lu_->solve(rhs - matrix_ * x);
            ++rep.iterations;
            res = (rhs - matrix_ * x).lpNorm<Eigen::Infinity>();
        }

        GridFunction u = g;
        for (int j = 1; j <= niy_; ++j)
            for (int i = 1; i <= nix_; ++i) u(i, j) = x[unknown(i, j)];

        rep.final_residual = residual(u);
        rep.converged = rep.final_residual <= opts_.tolerance;
        if (!rep.converged) rep.message = "linear solve did not reach tolerance";
        rep.max_principle_margin = max_principle_margin(u, g);
        return {std::move(u), rep};
    }

    /// Sup over interior nodes of |L_eps u| with the same stencil as the solve.
    double residual(const GridFunction& u) const {
        double r = 0.0;
        for (int j = 1; j < spec_.ny - 1; ++j)
            for (int i = 1; i < spec_.nx - 1; ++i) {
                const double v = cx_ * (u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j)) +
                                 cy_[i] * (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1));
                r = std::max(r, std::abs(v));
            }
        return r;
    }

    static double max_principle_margin(const GridFunction& u, const GridFunction& g) {
        const auto& s = u.spec();
        double gmax = -std::numeric_limits<double>::infinity(), gmin = -gmax;
        double umax = gmax, umin = gmin;
        for (int j = 0; j < s.ny; ++j)
            for (int i = 0; i < s.nx; ++i) {
                umax = std::max(umax, u(i, j));
                umin = std::min(umin, u(i, j));
                if (s.on_boundary(i, j)) {
                    gmax = std::max(gmax, g(i, j));
                    gmin = std::min(gmin, g(i, j));
                }
            }
        return std::min(gmax - umax, umin - gmin);
    }

private:
    int unknown(int i, int j) const { return (j - 1) * nix_ + (i - 1); }

    GridSpec spec_;
    RegularizerSpec reg_;
    GrushinOptions opts_;
    int nix_ = 0, niy_ = 0;
    double cx_ = 0.0;
    std::vector<double> cy_;
    Eigen::SparseMatrix<double> matrix_;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

inline std::pair<GridFunction, SolveReport> solve_dirichlet(const GridSpec& spec, double alpha,
                                                            double eps, const GridFunction& g,
                                                            GrushinOptions opts = {}) {
    return GrushinSolver(spec, alpha, eps, opts).solve(g);
}

template <class F>
    requires std::is_invocable_r_v<double, F, Point>
std::pair<GridFunction, SolveReport> solve_dirichlet(const GridSpec& spec, double alpha,
                                                     double eps, F&& g, GrushinOptions opts = {}) {
    return solve_dirichlet(spec, alpha, eps, sample(spec, std::forward<F>(g)), opts);
}

// ---------------------------------------------------------------------------
// Diagnostics.

struct HarnackReport {
    SectionSpec section;
    double sup = 0.0;
    double inf = 0.0;
    double quotient = 0.0;
};

namespace detail {
inline void require_section_in_grid(const GridSpec& spec, const SectionSpec& s, const char* who) {
    const Box bb = section_bounding_box(s);
    const Box gb = spec.box();
    if (bb.x_lo < gb.x_lo || bb.x_hi > gb.x_hi || bb.y_lo < gb.y_lo || bb.y_hi > gb.y_hi)
        throw std::invalid_argument(std::string(who) + ": section not contained in the grid");
}

template <class Visit>
void for_nodes_in_section(const GridSpec& spec, const SectionSpec& s, Visit&& visit) {
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i)
            if (section_contains(s, spec.node(i, j))) visit(i, j);
}
}  // namespace detail

/// sup/inf of u over grid nodes strictly inside the section.
inline HarnackReport harnack_quotient(const GridFunction& u, const SectionSpec& section) {
    detail::require_section_in_grid(u.spec(), section, "harnack_quotient");
    HarnackReport rep{section, -std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity(), 0.0};
    bool any = false;
    detail::for_nodes_in_section(u.spec(), section, [&](int i, int j) {
        const double v = u(i, j);
        if (!(v > 0.0)) throw std::domain_error("harnack_quotient: u must be positive on the section");
        rep.sup = std::max(rep.sup, v);
        rep.inf = std::min(rep.inf, v);
        any = true;
    });
    if (!any) throw std::invalid_argument("harnack_quotient: no grid node inside the section");
    rep.quotient = rep.sup / rep.inf;
    return rep;
}

/// Holder seminorm over all pairs of `points` (values by bilinear interpolation).
inline double holder_seminorm_points(const GridFunction& u, double gamma,
                                     const std::vector<Point>& points) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("holder_seminorm: gamma must lie in (0,1)");
    if (points.size() < 2) throw std::invalid_argument("holder_seminorm: empty sample");
    std::vector<double> vals(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) vals[k] = interp_bilinear(u, points[k]);
    double best = 0.0;
    for (std::size_t a = 0; a < points.size(); ++a)
        for (std::size_t b = a + 1; b < points.size(); ++b) {
            const double d2 = (points[a].x1 - points[b].x1) * (points[a].x1 - points[b].x1) +
                              (points[a].x2 - points[b].x2) * (points[a].x2 - points[b].x2);
            best = std::max(best, std::abs(vals[a] - vals[b]) / std::pow(d2, 0.5 * gamma));
        }
    return best;
}

/// [u]_{C^gamma(inner)} / sup_{outer} |u|, with the seminorm sampled on a lattice
/// of spacing `sample_spacing` inside `inner`. Returns 0 when u vanishes on outer.
inline double holder_estimate(const GridFunction& u, double gamma, const SectionSpec& inner,
                              const SectionSpec& outer, double sample_spacing = 1.0 / 16.0) {
    detail::require_section_in_grid(u.spec(), outer, "holder_estimate");
    double sup = 0.0;
    detail::for_nodes_in_section(u.spec(), outer,
                                 [&](int i, int j) { sup = std::max(sup, std::abs(u(i, j))); });
    if (sup == 0.0) return 0.0;
    const auto pts = section_sample_points(inner, sample_spacing);
    for (const auto& p : pts)
        if (!section_contains(outer, p))
            throw std::invalid_argument("holder_estimate: inner section not inside outer");
    return holder_seminorm_points(u, gamma, pts) / sup;
}

struct DerivativeBoundRow {
    double eps = 0.0;
    double ratio = 0.0;  // sup_{inner box} |D2 u| / sup_{boundary} |g|
    SolveReport report;
};

/// For each eps, solves L_eps u = 0 with data g and measures the centered x2
/// difference on the concentric sub-rectangle of half the side lengths.
inline std::vector<DerivativeBoundRow> derivative_bound_scan(const GridSpec& spec, double alpha,
                                                             const GridFunction& g,
                                                             const std::vector<double>& eps_list) {
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] > 0.0)) throw std::invalid_argument("derivative_bound_scan: eps must be positive");
        if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
            throw std::invalid_argument("derivative_bound_scan: eps list must be decreasing");
    }
    double gsup = 0.0;
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i)
            if (spec.on_boundary(i, j)) gsup = std::max(gsup, std::abs(g(i, j)));
    const double xc = 0.5 * (spec.x_lo + spec.x_hi), yc = 0.5 * (spec.y_lo + spec.y_hi);
    const double qx = 0.25 * (spec.x_hi - spec.x_lo), qy = 0.25 * (spec.y_hi - spec.y_lo);
    std::vector<DerivativeBoundRow> rows;
    for (double eps : eps_list) {
        auto [u, rep] = solve_dirichlet(spec, alpha, eps, g);
        double dmax = 0.0;
        for (int j = 1; j < spec.ny - 1; ++j)
            for (int i = 1; i < spec.nx - 1; ++i) {
                const Point p = spec.node(i, j);
                if (std::abs(p.x1 - xc) > qx + 1e-12 || std::abs(p.x2 - yc) > qy + 1e-12) continue;
                dmax = std::max(dmax, std::abs(u(i, j + 1) - u(i, j - 1)) / (2.0 * spec.hy()));
            }
        rows.push_back({eps, gsup == 0.0 ? 0.0 : dmax / gsup, rep});
    }
    return rows;
}

}  // namespace degenma
