// Small tour of the library: solve the degenerate Monge-Ampere problem with
// data from an exact solution, map it to the dual side and check the linear
// equation there.

#include <cmath>
#include <cstdio>

#include "degenma/analytic.hpp"
#include "degenma/grushin.hpp"
#include "degenma/ma.hpp"
#include "degenma/plegendre.hpp"

using namespace degenma;

int main() {
    const FamilyParams fam{1.0, 2.0, 0.5, {}};
    std::printf("det residual at (0.3, -0.2): %.3g\n", family_det_residual(fam, {0.3, -0.2}));

    const auto grid = GridSpec::with_spacing({-1, 1, -2, 2}, 1.0 / 64);
    auto exact = [&](Point x) { return family_eval(fam, x); };
    auto [u, rep] = ma_solve_dirichlet(grid, fam.alpha, 2.0 / 64, exact);
    double err = 0.0;
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) err = std::max(err, std::abs(u(i, j) - exact(grid.node(i, j))));
    std::printf("ma solve: converged=%d iterations=%d max error %.3g\n", rep.converged, rep.iterations, err);

    const auto dual = forward_transform(u, grid.ny);
    std::printf("dual side residual (columns near p1 = 0 skipped): %.3g\n", grushin_residual(dual, fam.alpha, 2));

    // the dual equation is linear: solve it directly with the closed-form dual as data
    const FamilyParams d = family_dual_params(fam);
    auto dual_exact = [&](Point q) { return dual_closed_form(d, q); };
    auto [v, grep] = solve_dirichlet(GridSpec::with_spacing({-1, 1, -1, 1}, 1.0 / 64), fam.alpha, 2.0 / 64, dual_exact);
    std::printf("linear solve: max principle margin %.3g, value at origin %.6f (exact %.6f)\n",
                grep.max_principle_margin, v(64, 64), dual_exact({0, 0}));
    return rep.converged ? 0 : 1;
}
