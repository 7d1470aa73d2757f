#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "degenma/analytic.hpp"
#include "degenma/grid.hpp"
#include "degenma/grushin.hpp"
#include "degenma/ma.hpp"
#include "degenma/plegendre.hpp"

namespace degenma::experiments {

// ---------------------------------------------------------------------------
// Configuration

/// Flat experiment configuration. Grid sizes are cells per unit length, so
/// "grids = 32, 64" means h = 1/32 then h = 1/64.
struct ExperimentConfig {
    std::string name;
    double alpha = 2.0;
    std::vector<int> grids{32, 64, 128};
    Box domain{-1.0, 1.0, -1.0, 1.0};
    double a = 1.0;
    double b = 0.0;
    LinearPart ell{};
    std::string eps_rule = "2h";  // "2h" or "fixed"
    double eps = 0.0625;          // used when eps_rule = fixed
    std::vector<double> eps_list{1.0 / 16, 1.0 / 32, 1.0 / 64};
    std::uint64_t seed = 1;
    int seeds = 20;
    MaConfig ma{};
    double gamma = 0.5;
    double tau = 0.25;
    int exclude_k = 2;
    int resolution = 2048;
    std::vector<double> r_values{0.5, 4.0};
    double ode_t_max = 0.5;
    double ode_step = 1e-3;
    std::string out = "out";
    bool write_grids = false;

    // Acceptance thresholds (pilot-calibrated values are fixed here).
    double tol_max_principle = 1e-9;
    double tol_refinement_ratio = 0.35;
    double tol_fit_rel_a = 0.05;
    double tol_fit_abs_b = 0.05;
    double tol_stability = 0.10;
    double tol_derivative_spread = 1.5;
    double tol_doubling = 1e-3;
    double tol_scaling = 1e-6;
    double tol_root = 1e-6;

    double eps_for(double h) const { return eps_rule == "2h" ? 2.0 * h : eps; }
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        // accept simple fractions such as 1/64
        const auto slash = v.find('/');
        if (slash != std::string::npos)
            return to_double(key, v.substr(0, slash)) / to_double(key, v.substr(slash + 1));
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for '" + key + "': " + v);
    }
}

inline std::vector<double> to_doubles(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
    return out;
}

}  // namespace detail

/// Applies one "key = value" assignment. Unknown keys are a ConfigError.
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
    using namespace detail;
    auto num = [&] { return to_double(key, value); };
    auto integer = [&] {
        const double d = num();
        if (d != std::floor(d)) throw ConfigError("config: '" + key + "' must be an integer");
        return static_cast<long long>(d);
    };
    if (key == "experiment") c.name = value;
    else if (key == "alpha") c.alpha = num();
    else if (key == "grids") {
        c.grids.clear();
        for (double d : to_doubles(key, value)) c.grids.push_back(static_cast<int>(d));
    } else if (key == "domain") {
        const auto d = to_doubles(key, value);
        if (d.size() != 4) throw ConfigError("config: domain needs x_lo, x_hi, y_lo, y_hi");
        c.domain = {d[0], d[1], d[2], d[3]};
    } else if (key == "a") c.a = num();
    else if (key == "b") c.b = num();
    else if (key == "ell") {
        const auto d = to_doubles(key, value);
        if (d.size() != 3) throw ConfigError("config: ell needs c0, c1, c2");
        c.ell = {d[0], d[1], d[2]};
    } else if (key == "eps_rule") {
        if (value != "2h" && value != "fixed") throw ConfigError("config: eps_rule must be 2h or fixed");
        c.eps_rule = value;
    } else if (key == "eps") c.eps = num();
    else if (key == "eps_list") c.eps_list = to_doubles(key, value);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(integer());
    else if (key == "seeds") c.seeds = static_cast<int>(integer());
    else if (key == "max_iterations") c.ma.max_iterations = static_cast<int>(integer());
    else if (key == "fixed_point_tolerance") c.ma.fixed_point_tolerance = num();
    else if (key == "damping") c.ma.damping = num();
    else if (key == "poisson_tolerance") c.ma.poisson_tolerance = num();
    else if (key == "newton_switch") c.ma.newton_switch = num();
    else if (key == "max_newton") c.ma.max_newton = static_cast<int>(integer());
    else if (key == "gamma") c.gamma = num();
    else if (key == "tau") c.tau = num();
    else if (key == "exclude_k") c.exclude_k = static_cast<int>(integer());
    else if (key == "resolution") c.resolution = static_cast<int>(integer());
    else if (key == "r_values") c.r_values = to_doubles(key, value);
    else if (key == "ode_t_max") c.ode_t_max = num();
    else if (key == "ode_step") c.ode_step = num();
    else if (key == "out") c.out = value;
    else if (key == "write_grids") c.write_grids = (value == "true" || value == "1" || value == "yes");
    else if (key == "tol_max_principle") c.tol_max_principle = num();
    else if (key == "tol_refinement_ratio") c.tol_refinement_ratio = num();
    else if (key == "tol_fit_rel_a") c.tol_fit_rel_a = num();
    else if (key == "tol_fit_abs_b") c.tol_fit_abs_b = num();
    else if (key == "tol_stability") c.tol_stability = num();
    else if (key == "tol_derivative_spread") c.tol_derivative_spread = num();
    else if (key == "tol_doubling") c.tol_doubling = num();
    else if (key == "tol_scaling") c.tol_scaling = num();
    else if (key == "tol_root") c.tol_root = num();
    else throw ConfigError("config: unknown key '" + key + "'");
}

/// Parses "key = value" lines; '#' starts a comment.
inline void parse_config(std::istream& is, ExperimentConfig& c) {
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        apply_setting(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
}

inline void validate(const ExperimentConfig& c) {
    if (c.grids.empty()) throw ConfigError("config: grids must be non-empty");
    for (std::size_t k = 0; k < c.grids.size(); ++k) {
        if (c.grids[k] < 2) throw ConfigError("config: grid sizes must be >= 2");
        if (k > 0 && c.grids[k] <= c.grids[k - 1])
            throw ConfigError("config: grid sizes must be strictly increasing");
    }
    if (!(c.alpha > -1.0)) throw ConfigError("config: alpha must exceed -1");
    if (!(c.a > 0.0)) throw ConfigError("config: a must be positive");
    if (c.domain.degenerate()) throw ConfigError("config: degenerate domain");
    if (c.seeds < 1) throw ConfigError("config: seeds must be positive");
    c.ma.validate();
}

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["experiment"] = c.name;
    j["alpha"] = c.alpha;
    j["grids"] = c.grids;
    j["domain"] = {c.domain.x_lo, c.domain.x_hi, c.domain.y_lo, c.domain.y_hi};
    j["a"] = c.a;
    j["b"] = c.b;
    j["ell"] = {c.ell.c0, c.ell.c1, c.ell.c2};
    j["eps_rule"] = c.eps_rule;
    j["eps"] = c.eps;
    j["eps_list"] = c.eps_list;
    j["seed"] = c.seed;
    j["seeds"] = c.seeds;
    j["max_iterations"] = c.ma.max_iterations;
    j["fixed_point_tolerance"] = c.ma.fixed_point_tolerance;
    j["damping"] = c.ma.damping;
    j["poisson_tolerance"] = c.ma.poisson_tolerance;
    j["newton_switch"] = c.ma.newton_switch;
    j["max_newton"] = c.ma.max_newton;
    j["gamma"] = c.gamma;
    j["tau"] = c.tau;
    j["exclude_k"] = c.exclude_k;
    j["resolution"] = c.resolution;
    j["r_values"] = c.r_values;
    j["ode_t_max"] = c.ode_t_max;
    j["ode_step"] = c.ode_step;
    j["out"] = c.out;
    j["write_grids"] = c.write_grids;
    j["tol_max_principle"] = c.tol_max_principle;
    j["tol_refinement_ratio"] = c.tol_refinement_ratio;
    j["tol_fit_rel_a"] = c.tol_fit_rel_a;
    j["tol_fit_abs_b"] = c.tol_fit_abs_b;
    j["tol_stability"] = c.tol_stability;
    j["tol_derivative_spread"] = c.tol_derivative_spread;
    j["tol_doubling"] = c.tol_doubling;
    j["tol_scaling"] = c.tol_scaling;
    j["tol_root"] = c.tol_root;
    return j;
}

// ---------------------------------------------------------------------------
// Metric tables

using Cell = std::variant<double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) {
        if (row.size() != columns.size()) throw std::logic_error("Table: row width mismatch");
        rows.push_back(std::move(row));
    }
    std::size_t col(const std::string& name) const {
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw std::out_of_range("Table: no column '" + name + "'");
        return static_cast<std::size_t>(it - columns.begin());
    }
    double num(std::size_t row, const std::string& name) const {
        const Cell& c = rows.at(row).at(col(name));
        if (const double* d = std::get_if<double>(&c)) return *d;
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::string str(std::size_t row, const std::string& name) const {
        const Cell& c = rows.at(row).at(col(name));
        if (const auto* s = std::get_if<std::string>(&c)) return *s;
        return format(c);
    }

    static std::string format(const Cell& c) {
        if (const auto* s = std::get_if<std::string>(&c)) return *s;
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(c));
        return buf;
    }
};

inline void write_table_csv(std::ostream& os, const Table& t) {
    for (std::size_t k = 0; k < t.columns.size(); ++k) os << (k ? "," : "") << t.columns[k];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << Table::format(row[k]);
        os << '\n';
    }
}

/// Reads write_table_csv output; cells that parse fully as numbers become doubles.
inline Table read_table_csv(std::istream& is) {
    Table t;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_table_csv: empty input");
    t.columns = detail::split_list(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<Cell> row;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) {
            char* end = nullptr;
            const double d = std::strtod(item.c_str(), &end);
            if (!item.empty() && end == item.c_str() + item.size()) row.emplace_back(d);
            else row.emplace_back(item);
        }
        if (!line.empty() && line.back() == ',') row.emplace_back(std::string{});
        t.add(std::move(row));
    }
    return t;
}

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunSummary {
    std::string experiment;
    ExperimentConfig config;
    Table metrics;
    std::vector<Verdict> verdicts;
    double wall_clock_seconds = 0.0;
    std::vector<std::pair<std::string, GridFunction>> fields;  // written when write_grids

    bool all_pass() const {
        return !verdicts.empty() &&
               std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
    }
};

// ---------------------------------------------------------------------------
// Shared building blocks

inline GridSpec grid_for(const ExperimentConfig& c, int n) {
    return GridSpec::with_spacing(c.domain, 1.0 / n);
}

inline FamilyParams family_of(const ExperimentConfig& c) { return {c.alpha, c.a, c.b, c.ell}; }

/// Smooth positive boundary data: a seeded trigonometric polynomial shifted so
/// its minimum over the domain boundary is 0.5.
class TrigBoundaryData {
public:
    TrigBoundaryData(std::uint64_t seed, const Box& box) {
        std::mt19937_64 rng(seed);
        // portable uniform on [0,1): the top 53 bits of the engine output
        auto unif = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        kx_ = std::numbers::pi / (box.x_hi - box.x_lo);
        ky_ = std::numbers::pi / (box.y_hi - box.y_lo);
        for (auto& t : terms_) {
            t.amp = unif();
            t.mx = static_cast<int>(unif() * 4.0);
            t.my = static_cast<int>(unif() * 4.0);
            t.phase = 2.0 * std::numbers::pi * unif();
        }
        offset_ = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        constexpr int n = 4096;
        for (int k = 0; k <= n; ++k) {
            const double tx = box.x_lo + (box.x_hi - box.x_lo) * k / n;
            const double ty = box.y_lo + (box.y_hi - box.y_lo) * k / n;
            lo = std::min({lo, (*this)({tx, box.y_lo}), (*this)({tx, box.y_hi}),
                           (*this)({box.x_lo, ty}), (*this)({box.x_hi, ty})});
        }
        offset_ = 0.5 - lo;
    }

    double operator()(Point p) const {
        double v = offset_;
        for (const auto& t : terms_) v += t.amp * std::cos(t.mx * kx_ * p.x1 + t.my * ky_ * p.x2 + t.phase);
        return v;
    }

private:
    struct Term {
        double amp = 0.0;
        int mx = 0, my = 0;
        double phase = 0.0;
    };
    std::array<Term, 6> terms_{};
    double kx_ = 1.0, ky_ = 1.0, offset_ = 0.0;
};

struct DualFit {
    double a_hat = 0.0;
    double b_hat = 0.0;
    double stdev_d22 = 0.0;
};

/// Estimates the family parameters from a dual grid function: a from the mean
/// of d22 u* and b from the mean of d12 u* on {p1 > 0}, which equals -a b.
inline DualFit fit_dual(const DualGridFunction& d, int exclude_k) {
    const auto& s = d.spec();
    const auto v22 = d22(d.values), v12 = d12(d.values);
    double sum = 0.0, sum2 = 0.0, sum12 = 0.0;
    long n = 0, n12 = 0;
    for (int j = 1; j < s.ny - 1; ++j)
        for (int i = 1; i < s.nx - 1; ++i) {
            if (!dual_column_retained(s, i, exclude_k)) continue;
            sum += v22(i, j);
            sum2 += v22(i, j) * v22(i, j);
            ++n;
            if (s.x(i) > 0.0) {
                sum12 += v12(i, j);
                ++n12;
            }
        }
    if (n == 0 || n12 == 0) throw std::invalid_argument("fit_dual: no retained interior nodes");
    DualFit f;
    f.a_hat = sum / n;
    f.stdev_d22 = std::sqrt(std::max(0.0, sum2 / n - f.a_hat * f.a_hat));
    f.b_hat = -(sum12 / n12) / f.a_hat;
    return f;
}

struct LiouvilleFitResult {
    double a_hat = 0.0;
    double b_hat = 0.0;
    Table table;  // one row per grid
};

/// MA solve with family boundary data, partial Legendre transform, fit. The
/// reported a_hat, b_hat are those of the finest grid.
inline LiouvilleFitResult liouville_fit(const ExperimentConfig& c,
                                        std::vector<std::pair<std::string, GridFunction>>* fields = nullptr) {
    const FamilyParams fam = family_of(c);
    LiouvilleFitResult out;
    out.table.columns = {"N", "h", "eps", "iterations", "converged", "a_hat", "b_hat", "stdev_d22",
                         "rel_stdev_d22", "rel_a_error", "abs_b_error", "grushin_residual"};
    for (int n : c.grids) {
        const GridSpec spec = grid_for(c, n);
        const double h = 1.0 / n;
        const double eps = c.eps_for(h);
        auto [u, rep] = ma_solve_dirichlet(spec, c.alpha, eps, [&](Point x) { return family_eval(fam, x); }, c.ma);
        const DualGridFunction dual = forward_transform(u, spec.ny);
        const DualFit fit = fit_dual(dual, c.exclude_k);
        const double res = grushin_residual(dual, c.alpha, c.exclude_k);
        out.table.add({double(n), h, eps, double(rep.iterations), rep.converged ? 1.0 : 0.0, fit.a_hat,
                       fit.b_hat, fit.stdev_d22, fit.stdev_d22 / fit.a_hat, std::abs(fit.a_hat - c.a) / c.a,
                       std::abs(fit.b_hat - c.b), res});
        out.a_hat = fit.a_hat;
        out.b_hat = fit.b_hat;
        if (fields) {
            fields->emplace_back("u_N" + std::to_string(n), std::move(u));
            fields->emplace_back("ustar_N" + std::to_string(n), dual.values);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Verdict helpers (operate on the metrics table only)

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline Verdict strictly_decreasing(const Table& t, const std::string& col, const std::string& name) {
    Verdict v{name, true, col + ":"};
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double x = t.num(r, col);
        v.detail += " " + fmt(x);
        if (!std::isfinite(x)) v.pass = false;
        if (r > 0 && !(x < t.num(r - 1, col))) v.pass = false;
    }
    if (t.rows.size() < 2) {
        v.pass = false;
        v.detail += " (needs >= 2 grids)";
    }
    return v;
}

inline Verdict all_at_least(const Table& t, const std::string& col, double bound, const std::string& name) {
    Verdict v{name, !t.rows.empty(), "min " + col + " >= " + fmt(bound) + ":"};
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double x = t.num(r, col);
        if (!(x >= bound)) v.pass = false;
        m = std::min(m, x);
    }
    v.detail += " " + fmt(m);
    return v;
}

inline Verdict all_at_most(const Table& t, const std::string& col, double bound, const std::string& name) {
    Verdict v{name, !t.rows.empty(), "max " + col + " <= " + fmt(bound) + ":"};
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double x = t.num(r, col);
        if (!(x <= bound)) v.pass = false;
        m = std::max(m, x);
    }
    v.detail += " " + fmt(m);
    return v;
}

inline double relative_change(double a, double b) { return std::abs(b - a) / std::max(std::abs(a), 1e-300); }

// Groups rows by column `key_col` (e.g. seed) and compares `col` between the
// first two distinct values of `grid_col`.
inline Verdict per_key_stability(const Table& t, const std::string& grid_col, const std::string& key_col,
                                 const std::string& col, double tol, const std::string& name) {
    std::map<double, std::map<double, double>> by_key;  // key -> grid -> value
    std::vector<double> grid_vals;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double g = t.num(r, grid_col);
        by_key[t.num(r, key_col)][g] = t.num(r, col);
        if (std::find(grid_vals.begin(), grid_vals.end(), g) == grid_vals.end()) grid_vals.push_back(g);
    }
    Verdict v{name, true, ""};
    if (grid_vals.size() < 2) return {name, false, "needs >= 2 grids"};
    double worst = 0.0;
    for (auto& [key, m] : by_key) {
        for (std::size_t k = 1; k < grid_vals.size(); ++k) {
            if (!m.count(grid_vals[k - 1]) || !m.count(grid_vals[k])) {
                v.pass = false;
                continue;
            }
            worst = std::max(worst, relative_change(m[grid_vals[k - 1]], m[grid_vals[k]]));
        }
    }
    if (!(worst <= tol)) v.pass = false;
    v.detail = "max relative change of " + col + " between grids " + fmt(worst) + " <= " + fmt(tol);
    return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentInfo {
    std::string name;
    std::string description;
    std::vector<std::string> columns;
    std::function<void(ExperimentConfig&)> defaults;
    std::function<Table(const ExperimentConfig&, std::vector<std::pair<std::string, GridFunction>>*)> run;
    std::function<std::vector<Verdict>(const Table&, const ExperimentConfig&)> verdicts;
};

namespace detail {

inline Table run_convergence_grushin(const ExperimentConfig& c,
                                     std::vector<std::pair<std::string, GridFunction>>* fields) {
    Table t{{"N", "h", "eps", "error", "residual", "max_principle_margin", "converged"}, {}};
    const FamilyParams dual = family_of(c);
    for (int n : c.grids) {
        const GridSpec spec = grid_for(c, n);
        const double eps = c.eps_for(1.0 / n);
        auto exact = [&](Point p) { return dual_closed_form(dual, p); };
        auto [u, rep] = solve_dirichlet(spec, c.alpha, eps, exact);
        double err = 0.0;
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i) err = std::max(err, std::abs(u(i, j) - exact(spec.node(i, j))));
        t.add({double(n), 1.0 / n, eps, err, rep.final_residual, rep.max_principle_margin,
               rep.converged ? 1.0 : 0.0});
        if (fields) fields->emplace_back("u_N" + std::to_string(n), std::move(u));
    }
    return t;
}

inline Table run_convergence_ma(const ExperimentConfig& c,
                                std::vector<std::pair<std::string, GridFunction>>* fields) {
    Table t{{"N", "h", "eps", "iterations", "converged", "error", "det_residual", "fixed_point_residual",
             "convexity_margin", "max_principle_margin"},
            {}};
    const FamilyParams fam = family_of(c);
    for (int n : c.grids) {
        const GridSpec spec = grid_for(c, n);
        const double eps = c.eps_for(1.0 / n);
        auto exact = [&](Point p) { return family_eval(fam, p); };
        auto [u, rep] = ma_solve_dirichlet(spec, c.alpha, eps, exact, c.ma);
        double err = 0.0;
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i) err = std::max(err, std::abs(u(i, j) - exact(spec.node(i, j))));
        t.add({double(n), 1.0 / n, eps, double(rep.iterations), rep.converged ? 1.0 : 0.0, err,
               rep.final_residual, ma_fixed_point_residual(u, c.alpha, eps), discrete_convexity_margin(u),
               rep.max_principle_margin});
        if (fields) fields->emplace_back("u_N" + std::to_string(n), std::move(u));
    }
    return t;
}

inline Table run_legendre_roundtrip(const ExperimentConfig& c,
                                    std::vector<std::pair<std::string, GridFunction>>* fields) {
    Table t{{"N", "h", "involution_error", "min_d22_ustar", "max_d11_ustar", "p2_lo", "p2_hi"}, {}};
    const FamilyParams fam = family_of(c);
    for (int n : c.grids) {
        const GridSpec spec = grid_for(c, n);
        const GridFunction u = sample(spec, [&](Point p) { return family_eval(fam, p); });
        const DualGridFunction d = forward_transform(u, spec.ny);
        const auto a = d11(d.values), b = d22(d.values);
        double min22 = std::numeric_limits<double>::infinity(), max11 = -min22;
        for (int j = 1; j < d.spec().ny - 1; ++j)
            for (int i = 1; i < d.spec().nx - 1; ++i) {
                min22 = std::min(min22, b(i, j));
                max11 = std::max(max11, a(i, j));
            }
        t.add({double(n), 1.0 / n, involution_check(u, spec.ny), min22, max11, d.p2_range.first,
               d.p2_range.second});
        if (fields) fields->emplace_back("ustar_N" + std::to_string(n), d.values);
    }
    return t;
}

inline Table run_harnack_scan(const ExperimentConfig& c,
                              std::vector<std::pair<std::string, GridFunction>>* fields) {
    Table t{{"N", "seed", "quotient", "sup", "inf", "max_principle_margin"}, {}};
    const SectionSpec section{c.alpha, {0.0, 0.0}, 1.0};
    const SectionSpec outer{c.alpha, {0.0, 0.0}, 2.0};
    for (int n : c.grids) {
        const GridSpec spec = grid_for(c, n);
        degenma::detail::require_section_in_grid(spec, outer, "harnack-scan");
        const GrushinSolver solver(spec, c.alpha, c.eps_for(1.0 / n));
        for (int k = 0; k < c.seeds; ++k) {
            const std::uint64_t seed = c.seed + k;
            const TrigBoundaryData g(seed, c.domain);
            auto [u, rep] = solver.solve(sample(spec, g));
            const HarnackReport h = harnack_quotient(u, section);
            t.add({double(n), double(seed), h.quotient, h.sup, h.inf, rep.max_principle_margin});
            if (fields && k == 0) fields->emplace_back("u_N" + std::to_string(n) + "_seed" + std::to_string(seed), u);
        }
    }
    return t;
}

inline Table run_holder_scan(const ExperimentConfig& c,
                             std::vector<std::pair<std::string, GridFunction>>* fields) {
    Table t{{"N", "seed", "gamma", "holder_ratio"}, {}};
    const SectionSpec inner{c.alpha, {0.0, 0.0}, 1.0};
    const SectionSpec outer{c.alpha, {0.0, 0.0}, 2.0};
    for (int n : c.grids) {
        const GridSpec spec = grid_for(c, n);
        const GrushinSolver solver(spec, c.alpha, c.eps_for(1.0 / n));
        for (int k = 0; k < c.seeds; ++k) {
            const std::uint64_t seed = c.seed + k;
            const TrigBoundaryData g(seed, c.domain);
            auto [u, rep] = solver.solve(sample(spec, g));
            t.add({double(n), double(seed), c.gamma, holder_estimate(u, c.gamma, inner, outer)});
            if (fields && k == 0) fields->emplace_back("u_N" + std::to_string(n) + "_seed" + std::to_string(seed), u);
        }
    }
    return t;
}

inline Table run_doubling_check(const ExperimentConfig& c, std::vector<std::pair<std::string, GridFunction>>*) {
    Table t{{"case", "alpha", "center_x1", "center_x2", "area_ratio", "measure_ratio", "expected"}, {}};
    const Box omega = c.domain;
    auto in_omega = [&](Point p) { return omega.contains(p); };
    const Ellipse e{0.4, 0.25, 0.3};
    const double centered = doubling_ratio(c.alpha, in_omega, omega, {0.0, 0.0}, e, c.resolution);
    t.add({std::string("centered"), c.alpha, 0.0, 0.0, 0.25, centered, std::pow(2.0, -(c.alpha + 2.0))});
    const Ellipse ea{0.3, 0.2, 0.0};
    const double offset = doubling_ratio(c.alpha, in_omega, omega, {0.5, 0.0}, ea, c.resolution);
    t.add({std::string("offset"), c.alpha, 0.5, 0.0, 0.25, offset, std::numeric_limits<double>::quiet_NaN()});

    // Condition mu_infinity spot checks: small ellipses E inside sections S,
    // reporting (|E|/|S|, mu(E)/mu(S)).
    std::mt19937_64 rng(c.seed);
    auto unif = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    const int res = std::max(64, c.resolution / 4);
    for (const Point center : {Point{0.0, 0.0}, Point{0.5, 0.0}}) {
        const SectionSpec s{c.alpha, center, 1.0};
        const Box sb = section_bounding_box(s);
        auto in_s = [&](Point p) { return section_contains(s, p); };
        const double area_s = mu_alpha_measure(0.0, in_s, sb, res);
        const double mu_s = mu_alpha_measure(c.alpha, in_s, sb, res);
        for (int k = 0; k < 4; ++k) {
            const double scale = 0.05 + 0.15 * unif();
            const Ellipse small{scale * (0.5 + unif()), scale * (0.5 + unif()), std::numbers::pi * unif()};
            const Point pc{sb.x_lo + (sb.x_hi - sb.x_lo) * (0.25 + 0.5 * unif()),
                           sb.y_lo + (sb.y_hi - sb.y_lo) * (0.25 + 0.5 * unif())};
            auto in_e = [&](Point p) {
                return small.contains({p.x1 - pc.x1, p.x2 - pc.x2}) && in_s(p);
            };
            const Box eb = small.bounding_box(pc);
            const double area_e = mu_alpha_measure(0.0, in_e, eb, res / 4);
            const double mu_e = mu_alpha_measure(c.alpha, in_e, eb, res / 4);
            t.add({std::string("mu_infinity"), c.alpha, center.x1, center.x2, area_e / area_s, mu_e / mu_s,
                   std::numeric_limits<double>::quiet_NaN()});
        }
    }
    return t;
}

inline Table run_strictconvexity_demo(const ExperimentConfig& c,
                                      std::vector<std::pair<std::string, GridFunction>>* fields) {
    if (!(c.alpha > 0.0)) throw ConfigError("strictconvexity-demo: alpha must be positive");
    Table t{{"part", "N", "alpha", "tau", "converged", "min_boundary_gap", "boundary_max", "bound_slack",
             "comparison_ok", "line_nodes", "line_max_abs", "det_residual_fd"},
            {}};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const int n = c.grids.back();
    const GridSpec spec = grid_for(c, n);
    {
        auto [u, rep] = ma_solve_dirichlet(spec, c.alpha, c.eps_for(1.0 / n), [](Point) { return 0.0; }, c.ma);
        // Subtract the discrete support plane at the node closest to the origin.
        const int i0 = static_cast<int>(std::lround(-spec.x_lo / spec.hx()));
        const int j0 = static_cast<int>(std::lround(-spec.y_lo / spec.hy()));
        const double s1 = (u(i0 + 1, j0) - u(i0 - 1, j0)) / (2 * spec.hx());
        const double s2 = (u(i0, j0 + 1) - u(i0, j0 - 1)) / (2 * spec.hy());
        const double base = u(i0, j0);
        GridFunction w(spec);
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i) {
                const Point p = spec.node(i, j);
                w(i, j) = u(i, j) - base - s1 * (p.x1 - spec.x(i0)) - s2 * (p.x2 - spec.y(j0));
            }
        const SectionSpec sec{c.alpha, {0.0, 0.0}, c.tau};
        double gap = std::numeric_limits<double>::infinity(), bmax = -gap;
        for (const Point& q : section_boundary_points(sec, 512)) {
            const double v = interp_bilinear(w, q);
            gap = std::min(gap, v);
            bmax = std::max(bmax, v);
        }
        // 0 <= -tau / sqrt(c(alpha)) + max_{boundary} w is the inequality behind R <= sqrt(c) M / tau.
        const double slack = bmax - c.tau / std::sqrt(phi_det_coefficient(c.alpha));
        const bool cmp = comparison_check(w, c.alpha, c.tau, bmax);
        t.add({std::string("ma"), double(n), c.alpha, c.tau, rep.converged ? 1.0 : 0.0, gap, bmax, slack,
               cmp ? 1.0 : 0.0, nan, nan, nan});
        if (fields) fields->emplace_back("ma_u_N" + std::to_string(n), std::move(w));
    }
    {
        const OdeTrajectory tr = ode_integrate(c.alpha, c.ode_t_max, c.ode_step);
        const double t_hi = tr.samples.back().t;
        const GridSpec ode_grid(-1.0, 1.0, 0.0, t_hi, 2 * n + 1, std::max(3, static_cast<int>(t_hi * n) + 1));
        const GridFunction u = sample(ode_grid, [&](Point p) { return ode_solution_eval(tr, p); });
        int line_nodes = 0;
        double line_max = 0.0;
        for (int j = 0; j < ode_grid.ny; ++j)
            for (int i = 0; i < ode_grid.nx; ++i)
                if (ode_grid.x(i) == 0.0) {
                    ++line_nodes;
                    line_max = std::max(line_max, std::abs(u(i, j)));
                }
        // det D^2 u - |x1|^alpha at (1, 0.1) by centered differences
        const double hh = 1e-4;
        auto f = [&](Point p) { return ode_solution_eval(tr, p); };
        const Point x{1.0, std::min(0.1, 0.5 * t_hi)};
        const double f0 = f(x);
        const double u11 = (f({x.x1 + hh, x.x2}) - 2 * f0 + f({x.x1 - hh, x.x2})) / (hh * hh);
        const double u22 = (f({x.x1, x.x2 + hh}) - 2 * f0 + f({x.x1, x.x2 - hh})) / (hh * hh);
        const double u12 = (f({x.x1 + hh, x.x2 + hh}) - f({x.x1 + hh, x.x2 - hh}) - f({x.x1 - hh, x.x2 + hh}) +
                            f({x.x1 - hh, x.x2 - hh})) / (4 * hh * hh);
        const double det_res = std::abs(u11 * u22 - u12 * u12 - std::pow(std::abs(x.x1), c.alpha));
        t.add({std::string("ode"), double(n), c.alpha, nan, tr.truncated ? 0.0 : 1.0, nan, nan, nan, nan,
               double(line_nodes), line_max, det_res});
        if (fields) fields->emplace_back("ode_u_N" + std::to_string(n), u);
    }
    return t;
}

inline Table run_barrier_check(const ExperimentConfig& c, std::vector<std::pair<std::string, GridFunction>>*) {
    Table t{{"variant", "alpha", "C", "max_L_poly", "root", "root_newton", "root_diff"}, {}};
    struct Case {
        BarrierVariant v;
        std::vector<double> alphas;
    };
    const std::vector<Case> cases{{BarrierVariant::case1, {0.0, 1.0, 2.0}},
                                  {BarrierVariant::case2, {-0.75, -0.5, -0.25}}};
    for (const auto& cs : cases) {
        const double root = barrier_root(cs.v);
        // independent check: Newton iteration on the same cubic
        double p = 0.5;
        for (int k = 0; k < 100; ++k) {
            const bool one = cs.v == BarrierVariant::case1;
            const double f = one ? p + p * p * p / 3 - 5.0 / 6.0 : p / 16 + p * p * p / 3 - 1.0 / 3 - 1.0 / 32;
            const double df = one ? 1 + p * p : 1.0 / 16 + p * p;
            p -= f / df;
        }
        for (double al : cs.alphas)
            for (double C : {1.0, 10.0, 100.0}) {
                const BarrierSpec spec{cs.v, C};
                double worst = -std::numeric_limits<double>::infinity();
                for (int a = 0; a < 100; ++a)
                    for (int b = 0; b < 100; ++b) {
                        const Point q{spec.p1_lo() + (spec.p1_hi() - spec.p1_lo()) * a / 99.0, b / 100.0};
                        worst = std::max(worst, barrier_L_residual(spec, al, q));
                    }
                t.add({std::string(cs.v == BarrierVariant::case1 ? "case1" : "case2"), al, C, worst, root, p,
                       std::abs(root - p)});
            }
    }
    return t;
}

inline Table run_scaling_check(const ExperimentConfig& c, std::vector<std::pair<std::string, GridFunction>>*) {
    Table t{{"alpha", "r", "x1", "x2", "lhs", "rhs", "residual", "family_fixed_dev"}, {}};
    // non-solution probe: L v != 0
    auto probe = [](Point p) { return std::exp(0.3 * p.x1) * std::cos(0.7 * p.x2) + p.x1 * p.x1 * p.x2; };
    const double h = 1.0 / 128.0;
    const FamilyParams fam{c.alpha, c.a, 0.0, {}};
    auto family = [&](Point p) { return family_eval(fam, p); };
    for (double r : c.r_values) {
        const auto vr = scale_pullback(probe, r, c.alpha);
        const auto ur = scale_pullback(family, r, c.alpha);
        const double s1 = std::pow(r, 1.0 / (2.0 + c.alpha)), s2 = std::sqrt(r);
        for (double x1 : {-0.75, -0.2, 0.3, 0.9})
            for (double x2 : {-0.5, 0.1, 0.6}) {
                const Point x{x1, x2};
                const double lhs = grushin_apply_fd(vr, c.alpha, x, h, h);
                const double rhs = std::pow(r, -c.alpha / (2.0 + c.alpha)) *
                                   grushin_apply_fd(probe, c.alpha, scaled_point(x, r, c.alpha), s1 * h, s2 * h);
                t.add({c.alpha, r, x1, x2, lhs, rhs, std::abs(lhs - rhs), std::abs(ur(x) - family(x))});
            }
    }
    return t;
}

inline Table run_derivative_bound_scan(const ExperimentConfig& c,
                                       std::vector<std::pair<std::string, GridFunction>>*) {
    Table t{{"N", "seed", "eps", "ratio", "converged"}, {}};
    const int n = c.grids.back();
    const GridSpec spec = grid_for(c, n);
    for (int k = 0; k < c.seeds; ++k) {
        const std::uint64_t seed = c.seed + k;
        const GridFunction g = sample(spec, TrigBoundaryData(seed, c.domain));
        for (const auto& row : derivative_bound_scan(spec, c.alpha, g, c.eps_list))
            t.add({double(n), double(seed), row.eps, row.ratio, row.report.converged ? 1.0 : 0.0});
    }
    return t;
}

inline Verdict refinement_ratio(const Table& t, const std::string& col, double ratio, const std::string& name) {
    Verdict v{name, t.rows.size() >= 2, col + "(h/2)/" + col + "(h):"};
    for (std::size_t r = 1; r < t.rows.size(); ++r) {
        const double q = t.num(r, col) / t.num(r - 1, col);
        v.detail += " " + fmt(q);
        if (!(q <= ratio)) v.pass = false;
    }
    v.detail += " <= " + fmt(ratio);
    return v;
}

inline Verdict spread_per_seed(const Table& t, double bound) {
    std::map<double, std::pair<double, double>> mm;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double s = t.num(r, "seed"), x = t.num(r, "ratio");
        auto it = mm.find(s);
        if (it == mm.end()) mm[s] = {x, x};
        else it->second = {std::min(it->second.first, x), std::max(it->second.second, x)};
    }
    double worst = 0.0;
    bool ok = !mm.empty();
    for (const auto& [s, p] : mm) {
        const double q = p.first > 0.0 ? p.second / p.first : std::numeric_limits<double>::infinity();
        if (p.second == 0.0) continue;  // constant data: all ratios zero
        worst = std::max(worst, q);
    }
    if (!(worst <= bound)) ok = false;
    return {"ratio_spread", ok, "max over seeds of max/min ratio " + fmt(worst) + " <= " + fmt(bound)};
}

}  // namespace detail

inline const std::vector<ExperimentInfo>& registry() {
    using detail::all_at_least;
    using detail::all_at_most;
    static const std::vector<ExperimentInfo> reg{
        {"convergence-grushin",
         "Regularized Grushin Dirichlet solve against the closed-form dual solution; error under refinement.",
         {"N", "h", "eps", "error", "residual", "max_principle_margin", "converged"},
         [](ExperimentConfig& c) { c.alpha = 2.0; c.grids = {32, 64, 128}; c.a = 1.0; c.b = 0.0; },
         detail::run_convergence_grushin,
         [](const Table& t, const ExperimentConfig& c) {
             return std::vector<Verdict>{detail::strictly_decreasing(t, "error", "error_decreasing"),
                                         all_at_least(t, "max_principle_margin", -c.tol_max_principle, "max_principle"),
                                         all_at_least(t, "converged", 1.0, "converged")};
         }},
        {"convergence-ma",
         "Degenerate Monge-Ampere Dirichlet solve with family boundary data; error under refinement.",
         {"N", "h", "eps", "iterations", "converged", "error", "det_residual", "fixed_point_residual",
          "convexity_margin", "max_principle_margin"},
         [](ExperimentConfig& c) { c.alpha = 1.0; c.grids = {32, 64, 128}; c.a = 2.0; c.b = 0.5; },
         detail::run_convergence_ma,
         [](const Table& t, const ExperimentConfig& c) {
             const double delta = 10.0 * c.ma.fixed_point_tolerance;
             return std::vector<Verdict>{detail::strictly_decreasing(t, "error", "error_decreasing"),
                                         all_at_least(t, "converged", 1.0, "converged"),
                                         all_at_least(t, "convexity_margin", -delta, "discrete_convexity"),
                                         all_at_most(t, "fixed_point_residual", delta, "fixed_point_identity")};
         }},
        {"legendre-roundtrip",
         "Partial Legendre transform of family samples: involution error and convexity/concavity of u*.",
         {"N", "h", "involution_error", "min_d22_ustar", "max_d11_ustar", "p2_lo", "p2_hi"},
         [](ExperimentConfig& c) { c.alpha = 2.0; c.grids = {32, 64, 128}; c.a = 1.5; c.b = 0.3; c.ell = {0.1, 0.2, 0.3}; },
         detail::run_legendre_roundtrip,
         [](const Table& t, const ExperimentConfig& c) {
             return std::vector<Verdict>{
                 detail::refinement_ratio(t, "involution_error", c.tol_refinement_ratio, "involution_second_order"),
                 all_at_least(t, "min_d22_ustar", -1e-9, "convex_in_p2"),
                 all_at_most(t, "max_d11_ustar", 1e-9, "concave_in_p1")};
         }},
        {"liouville-fit",
         "MA solve -> partial Legendre transform -> recover (a, b) of the entire-solution family.",
         {"N", "h", "eps", "iterations", "converged", "a_hat", "b_hat", "stdev_d22", "rel_stdev_d22", "rel_a_error",
          "abs_b_error", "grushin_residual"},
         [](ExperimentConfig& c) {
             c.alpha = 1.0; c.grids = {32, 64, 128}; c.a = 2.0; c.b = 0.5; c.domain = {-1.0, 1.0, -2.0, 2.0};
         },
         [](const ExperimentConfig& c, std::vector<std::pair<std::string, GridFunction>>* f) {
             return liouville_fit(c, f).table;
         },
         [](const Table& t, const ExperimentConfig& c) {
             std::vector<Verdict> v;
             const std::size_t last = t.rows.size() - 1;
             const double ra = t.num(last, "rel_a_error"), eb = t.num(last, "abs_b_error");
             v.push_back({"a_recovered", ra <= c.tol_fit_rel_a,
                          "finest |a_hat-a|/a " + detail::fmt(ra) + " <= " + detail::fmt(c.tol_fit_rel_a)});
             v.push_back({"b_recovered", eb <= c.tol_fit_abs_b,
                          "finest |b_hat-b| " + detail::fmt(eb) + " <= " + detail::fmt(c.tol_fit_abs_b)});
             v.push_back(detail::strictly_decreasing(t, "rel_stdev_d22", "d22_constancy_improves"));
             v.push_back(detail::strictly_decreasing(t, "grushin_residual", "dual_residual_decreasing"));
             return v;
         }},
        {"harnack-scan",
         "Harnack quotient sup/inf on S(0,1) of Grushin solves with seeded positive boundary data.",
         {"N", "seed", "quotient", "sup", "inf", "max_principle_margin"},
         [](ExperimentConfig& c) { c.alpha = 2.0; c.grids = {32, 64}; c.domain = {-1.5, 1.5, -1.5, 1.5}; c.seeds = 20; },
         detail::run_harnack_scan,
         [](const Table& t, const ExperimentConfig& c) {
             std::vector<Verdict> v{all_at_least(t, "quotient", 1.0, "quotient_at_least_one"),
                                    all_at_least(t, "max_principle_margin", -c.tol_max_principle, "max_principle")};
             std::map<double, double> max_q;
             for (std::size_t r = 0; r < t.rows.size(); ++r) {
                 double& m = max_q[t.num(r, "N")];
                 m = std::max(m, t.num(r, "quotient"));
             }
             if (max_q.size() >= 2) {
                 v.push_back(detail::per_key_stability(t, "N", "seed", "quotient", c.tol_stability,
                                                       "per_seed_stability"));
                 double worst = 0.0, prev = std::numeric_limits<double>::quiet_NaN();
                 for (const auto& [n, q] : max_q) {
                     if (!std::isnan(prev)) worst = std::max(worst, detail::relative_change(prev, q));
                     prev = q;
                 }
                 v.push_back({"max_quotient_stability", worst <= c.tol_stability,
                              "relative change of max quotient " + detail::fmt(worst) + " <= " +
                                  detail::fmt(c.tol_stability)});
             }
             return v;
         }},
        {"holder-scan",
         "Empirical Holder constant [u]_{C^gamma(S(0,1))} / sup_{S(0,2)} |u| over seeded Grushin solves.",
         {"N", "seed", "gamma", "holder_ratio"},
         [](ExperimentConfig& c) { c.alpha = 2.0; c.grids = {32, 64}; c.domain = {-1.5, 1.5, -1.5, 1.5}; c.seeds = 20; },
         detail::run_holder_scan,
         [](const Table& t, const ExperimentConfig& c) {
             std::vector<Verdict> v{all_at_least(t, "holder_ratio", 0.0, "ratio_nonnegative")};
             v.push_back(detail::per_key_stability(t, "N", "seed", "holder_ratio", c.tol_stability, "ratio_stability"));
             return v;
         }},
        {"doubling-check",
         "Doubling ratio of mu_alpha for ellipses, plus condition mu_infinity spot samples.",
         {"case", "alpha", "center_x1", "center_x2", "area_ratio", "measure_ratio", "expected"},
         [](ExperimentConfig& c) { c.alpha = 2.0; c.domain = {-2.0, 2.0, -2.0, 2.0}; c.resolution = 2048; },
         detail::run_doubling_check,
         [](const Table& t, const ExperimentConfig& c) {
             std::vector<Verdict> v;
             for (std::size_t r = 0; r < t.rows.size(); ++r) {
                 const std::string kind = t.str(r, "case");
                 const double q = t.num(r, "measure_ratio");
                 if (kind == "centered") {
                     const double dev = std::abs(q - t.num(r, "expected"));
                     v.push_back({"centered_ratio", dev <= c.tol_doubling,
                                  "|ratio - 2^-(alpha+2)| = " + detail::fmt(dev) + " <= " + detail::fmt(c.tol_doubling)});
                 } else if (kind == "offset") {
                     v.push_back({"offset_ratio_positive", q > 0.0 && q <= 1.0, "ratio " + detail::fmt(q)});
                 }
             }
             return v;
         }},
        {"strictconvexity-demo",
         "MA solve with zero data is strictly convex at the origin; the ODE example is flat on {x1 = 0}.",
         {"part", "N", "alpha", "tau", "converged", "min_boundary_gap", "boundary_max", "bound_slack",
          "comparison_ok", "line_nodes", "line_max_abs", "det_residual_fd"},
         [](ExperimentConfig& c) { c.alpha = 2.0; c.grids = {64}; c.tau = 0.25; },
         detail::run_strictconvexity_demo,
         [](const Table& t, const ExperimentConfig&) {
             std::vector<Verdict> v;
             for (std::size_t r = 0; r < t.rows.size(); ++r) {
                 if (t.str(r, "part") == "ma") {
                     v.push_back({"ma_converged", t.num(r, "converged") == 1.0, ""});
                     v.push_back({"strict_convexity_gap", t.num(r, "min_boundary_gap") > 0.0,
                                  "min over boundary of section of (u - support plane) = " +
                                      detail::fmt(t.num(r, "min_boundary_gap"))});
                     v.push_back({"section_bound", t.num(r, "bound_slack") >= 0.0,
                                  "max_boundary - tau/sqrt(c) = " + detail::fmt(t.num(r, "bound_slack"))});
                     v.push_back({"comparison_check", t.num(r, "comparison_ok") == 1.0, ""});
                 } else {
                     v.push_back({"ode_flat_on_line", t.num(r, "line_nodes") > 0 && t.num(r, "line_max_abs") == 0.0,
                                  "not strictly convex: u = 0 on all " + detail::fmt(t.num(r, "line_nodes")) +
                                      " nodes of {x1 = 0}"});
                     v.push_back({"ode_det_residual", t.num(r, "det_residual_fd") <= 1e-6,
                                  "fd det residual " + detail::fmt(t.num(r, "det_residual_fd"))});
                 }
             }
             return v;
         }},
        {"barrier-check",
         "Sign of L applied to the surjectivity barriers on their rectangles; barrier roots.",
         {"variant", "alpha", "C", "max_L_poly", "root", "root_newton", "root_diff"},
         [](ExperimentConfig&) {},
         detail::run_barrier_check,
         [](const Table& t, const ExperimentConfig& c) {
             return std::vector<Verdict>{all_at_most(t, "max_L_poly", 0.0, "L_poly_nonpositive"),
                                         all_at_most(t, "root_diff", c.tol_root, "roots_agree")};
         }},
        {"scaling-check",
         "Anisotropic scaling u_r: discrete chain-rule identity for L on a non-solution probe.",
         {"alpha", "r", "x1", "x2", "lhs", "rhs", "residual", "family_fixed_dev"},
         [](ExperimentConfig& c) { c.alpha = 2.0; c.a = 1.0; c.r_values = {0.5, 4.0}; },
         detail::run_scaling_check,
         [](const Table& t, const ExperimentConfig& c) {
             return std::vector<Verdict>{all_at_most(t, "residual", c.tol_scaling, "chain_rule_identity"),
                                         all_at_most(t, "family_fixed_dev", 1e-12, "family_scaling_fixed")};
         }},
        {"derivative-bound-scan",
         "sup |D2 u_eps| / sup |g| on the inner half-box as eps decreases (eps-uniform derivative bound).",
         {"N", "seed", "eps", "ratio", "converged"},
         [](ExperimentConfig& c) {
             c.alpha = 2.0; c.grids = {128}; c.seeds = 3; c.eps_list = {1.0 / 16, 1.0 / 32, 1.0 / 64};
         },
         detail::run_derivative_bound_scan,
         [](const Table& t, const ExperimentConfig& c) {
             return std::vector<Verdict>{detail::spread_per_seed(t, c.tol_derivative_spread),
                                         all_at_least(t, "converged", 1.0, "converged")};
         }},
    };
    return reg;
}

inline const ExperimentInfo* find_experiment(const std::string& name) {
    for (const auto& e : registry())
        if (e.name == name) return &e;
    return nullptr;
}

/// Config for `name` with its registered defaults applied.
inline ExperimentConfig default_config(const std::string& name) {
    const ExperimentInfo* info = find_experiment(name);
    if (!info) throw ConfigError("unknown experiment '" + name + "'");
    ExperimentConfig c;
    c.name = name;
    info->defaults(c);
    return c;
}

inline std::vector<Verdict> evaluate_verdicts(const ExperimentConfig& c, const Table& t) {
    const ExperimentInfo* info = find_experiment(c.name);
    if (!info) throw ConfigError("unknown experiment '" + c.name + "'");
    return info->verdicts(t, c);
}

/// Runs an experiment. Solver or numerical failures are caught and reported
/// as a failed "completed" verdict; an unknown name throws ConfigError.
inline RunSummary run(const ExperimentConfig& c) {
    const ExperimentInfo* info = find_experiment(c.name);
    if (!info) throw ConfigError("unknown experiment '" + c.name + "'");
    validate(c);
    RunSummary s;
    s.experiment = c.name;
    s.config = c;
    s.metrics.columns = info->columns;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        s.metrics = info->run(c, c.write_grids ? &s.fields : nullptr);
        s.verdicts = info->verdicts(s.metrics, c);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        s.verdicts.push_back({"completed", false, e.what()});
    }
    s.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return s;
}

inline nlohmann::ordered_json summary_json(const RunSummary& s) {
    nlohmann::ordered_json j;
    j["experiment"] = s.experiment;
    j["config_echo"] = config_to_json(s.config);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : s.metrics.rows) {
        nlohmann::ordered_json r;
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (const auto* d = std::get_if<double>(&row[k])) {
                if (std::isfinite(*d)) r[s.metrics.columns[k]] = *d;
                else r[s.metrics.columns[k]] = nullptr;
            } else {
                r[s.metrics.columns[k]] = std::get<std::string>(row[k]);
            }
        }
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    nlohmann::ordered_json verdicts = nlohmann::ordered_json::object();
    for (const auto& v : s.verdicts) verdicts[v.name] = {{"pass", v.pass}, {"detail", v.detail}};
    j["verdicts"] = std::move(verdicts);
    j["wall_clock_seconds"] = s.wall_clock_seconds;
    // liouville-fit headline values
    if (s.experiment == "liouville-fit" && !s.metrics.rows.empty()) {
        const std::size_t last = s.metrics.rows.size() - 1;
        j["a_hat"] = s.metrics.num(last, "a_hat");
        j["b_hat"] = s.metrics.num(last, "b_hat");
    }
    return j;
}

/// Writes metrics.csv, summary.json and (optionally) per-grid field CSVs into dir.
inline void write_outputs(const RunSummary& s, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "metrics.csv");
        write_table_csv(os, s.metrics);
        if (!os) throw std::runtime_error("cannot write " + (dir / "metrics.csv").string());
    }
    {
        std::ofstream os(dir / "summary.json");
        os << summary_json(s).dump(2) << '\n';
        if (!os) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
    }
    for (const auto& [name, f] : s.fields) {
        std::ofstream os(dir / (name + ".csv"));
        write_csv(os, f);
    }
}

}  // namespace degenma::experiments
