#include "fracheat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fracheat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// index arithmetic on a GridSpec (axis 0 fastest)
struct GridIndex {
    const GridSpec& g;
    std::vector<size_t> stride;
    std::vector<double> spacing;

    explicit GridIndex(const GridSpec& grid) : g(grid), stride(grid.N), spacing(grid.N) {
        size_t st = 1;
        for (int a = 0; a < g.N; ++a) {
            stride[a] = st;
            st *= g.counts[a];
            spacing[a] = (g.hi[a] - g.lo[a]) / (g.counts[a] - 1);
        }
    }

    // y as whole grid steps, or nullopt
    std::optional<std::vector<long>> offset(const Point& y) const {
        std::vector<long> off(g.N);
        for (int a = 0; a < g.N; ++a) {
            double k = y[a] / spacing[a];
            double r = std::round(k);
            if (std::abs(k - r) > 1e-9 * std::max(1.0, std::abs(r))) return std::nullopt;
            off[a] = static_cast<long>(r);
        }
        return off;
    }

    // node + sign * off, or nullopt if outside the grid
    std::optional<size_t> shift(size_t node, const std::vector<long>& off, long sign) const {
        size_t out = 0;
        for (int a = 0; a < g.N; ++a) {
            long k = static_cast<long>((node / stride[a]) % g.counts[a]) + sign * off[a];
            if (k < 0 || k >= g.counts[a]) return std::nullopt;
            out += static_cast<size_t>(k) * stride[a];
        }
        return out;
    }
};

struct Step {
    Point y;
    std::vector<long> off;
    double length;
};

std::vector<Step> usable_steps(const GridIndex& gi, const std::vector<Point>& directions,
                               const std::vector<double>& steps) {
    std::vector<Step> out;
    for (const Point& d : directions) {
        if (static_cast<int>(d.size()) != gi.g.N) throw DomainError("direction dimension differs from the grid");
        double n = norm(d);
        if (!(n > 0.0)) throw DomainError("zero direction");
        for (double h : steps) {
            Point y(d.size());
            for (size_t i = 0; i < d.size(); ++i) y[i] = h * d[i] / n;
            if (auto off = gi.offset(y)) {
                bool zero = std::all_of(off->begin(), off->end(), [](long k) { return k == 0; });
                if (!zero) out.push_back({y, *off, std::abs(h)});
            }
        }
    }
    return out;
}

std::string time_tag(double t) { return "t=" + std::to_string(t); }

}  // namespace

std::optional<std::pair<double, double>> datum_range(const FunctionSpec& u0) {
    const auto& p = u0.params();
    switch (u0.family()) {
        case Family::Constant: return std::make_pair(p[0], p[0]);
        case Family::Cosine: return std::make_pair(-1.0, 1.0);
        case Family::Gaussian: return std::make_pair(0.0, 1.0);
        case Family::AbsPower:
            if (p[0] == 0.0) return std::make_pair(1.0, 1.0);
            if (p[0] < 0.0) return std::make_pair(0.0, 1.0);
            return std::nullopt;
        case Family::Ruled: return datum_range(*u0.profile());
        default: return std::nullopt;
    }
}

VerificationReport max_principle_check(const SolutionField& field, const FunctionSpec& u0, double tolerance) {
    auto range = datum_range(u0);
    if (!range) throw DomainError("max_principle_check needs a bounded datum, got " + u0.to_string());
    VerificationReport rep;
    rep.suite = "maxprinciple";
    GridIndex gi(field.grid);
    double hi = -kInf, lo = kInf;
    size_t khi = 0, ihi = 0, klo = 0, ilo = 0;
    std::vector<double> sup_t(field.values.size(), -kInf);
    for (size_t k = 0; k < field.values.size(); ++k)
        for (size_t i = 0; i < field.values[k].size(); ++i) {
            double v = field.values[k][i];
            sup_t[k] = std::max(sup_t[k], v);
            if (v > hi) hi = v, khi = k, ihi = i;
            if (v < lo) lo = v, klo = k, ilo = i;
        }
    Point whi = field.grid.node(ihi), wlo = field.grid.node(ilo);
    whi.push_back(field.grid.times[khi]);
    wlo.push_back(field.grid.times[klo]);
    rep.add({"sup_u", hi, range->second, tolerance, hi <= range->second + tolerance, whi, "sup u <= sup u0 + tol"});
    rep.add({"inf_u", lo, range->first, tolerance, lo >= range->first - tolerance, wlo, "inf u >= inf u0 - tol"});
    if (!u0.constant_like()) {
        bool decreasing = true;
        double worst = kInf;
        double prev = kInf;
        for (size_t k = 0; k < sup_t.size(); ++k) {
            if (field.grid.times[k] <= 0.0) continue;
            if (std::isfinite(prev)) worst = std::min(worst, prev - sup_t[k]);
            if (!(sup_t[k] < prev)) decreasing = false;
            prev = sup_t[k];
        }
        if (std::isfinite(worst))
            rep.add({"sup_decreasing_in_t", worst, 0.0, 0.0, decreasing, {}, "max_x u(x,t) strictly decreasing for t > 0"});
    }
    return rep;
}

std::vector<Point> axis_and_diagonal_directions(int N) {
    std::vector<Point> out;
    for (int a = 0; a < N; ++a) {
        Point d(N, 0.0);
        d[a] = 1.0;
        out.push_back(d);
    }
    for (int a = 0; a < N; ++a)
        for (int b = a + 1; b < N; ++b)
            for (double sgn : {1.0, -1.0}) {
                Point d(N, 0.0);
                d[a] = 1.0 / std::sqrt(2.0);
                d[b] = sgn / std::sqrt(2.0);
                out.push_back(d);
            }
    return out;
}

ConvexityReport convexity_check(const SolutionField& field, const std::vector<Point>& directions,
                                const std::vector<double>& steps, double tolerance) {
    GridIndex gi(field.grid);
    auto usable = usable_steps(gi, directions, steps);
    if (usable.empty()) throw DomainError("convexity_check: no direction/step pair lands on grid nodes");
    const size_t nt = field.values.size(), n = field.grid.num_nodes();

    struct PerTime {
        double min = kInf, margin = kInf;
        size_t node = 0, step = 0, triples = 0;
    };
    std::vector<PerTime> per(nt);
    parallel_for(nt, [&](size_t k) {
        PerTime& p = per[k];
        const auto& u = field.values[k];
        for (size_t j = 0; j < usable.size(); ++j)
            for (size_t i = 0; i < n; ++i) {
                auto a = gi.shift(i, usable[j].off, 1), b = gi.shift(i, usable[j].off, -1);
                if (!a || !b) continue;
                double d2 = u[*a] + u[*b] - 2.0 * u[i];
                ++p.triples;
                if (d2 < p.min) p.min = d2, p.node = i, p.step = j;
                if (std::abs(usable[j].length - 1.0) < 1e-9) p.margin = std::min(p.margin, d2);
            }
    });

    ConvexityReport rep;
    rep.report.suite = "convexity";
    rep.min_second_difference = kInf;
    rep.strictness_margin = kInf;
    for (size_t k = 0; k < nt; ++k) {
        rep.triples += per[k].triples;
        rep.min_by_time.push_back(per[k].min);
        const double t = field.grid.times[k];
        if (per[k].triples > 0) {
            Point where = field.grid.node(per[k].node);
            rep.report.add({"min_second_difference_" + time_tag(t), per[k].min, 0.0, tolerance,
                            t == 0.0 || per[k].min >= -tolerance, where, t == 0.0 ? "datum (not scored)" : ""});
        }
        if (t <= 0.0) continue;
        if (per[k].min < rep.min_second_difference) {
            rep.min_second_difference = per[k].min;
            rep.worst_x = field.grid.node(per[k].node);
            rep.worst_y = usable[per[k].step].y;
            rep.worst_t = t;
        }
        rep.strictness_margin = std::min(rep.strictness_margin, per[k].margin);
    }
    if (!std::isfinite(rep.strictness_margin)) rep.strictness_margin = std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(rep.min_second_difference)) {
        // only t = 0 rows: judge the datum itself
        rep.min_second_difference = per.empty() ? kInf : per[0].min;
        rep.worst_x = field.grid.node(per[0].node);
        rep.worst_y = usable[per[0].step].y;
    }
    rep.convex = rep.min_second_difference >= -tolerance;
    rep.report.add({"convex", rep.min_second_difference, 0.0, tolerance, rep.convex, rep.worst_x,
                    "min over t > 0 of u(x+y) + u(x-y) - 2u(x)"});
    return rep;
}

RuledReport ruled_check(const SolutionField& field, const Point& xi, std::vector<double> mus, double tolerance) {
    GridIndex gi(field.grid);
    const double n = norm(xi);
    if (static_cast<int>(xi.size()) != field.grid.N || !(n > 0.0)) throw DomainError("ruled_check: bad direction");
    if (mus.empty()) {
        // smallest mu with mu xi on the grid, then its multiples
        for (double m = 1; m <= 8 && mus.empty(); ++m)
            for (int a = 0; a < field.grid.N && mus.empty(); ++a) {
                if (xi[a] == 0.0) continue;
                double mu = m * gi.spacing[a] * n / std::abs(xi[a]);
                Point y(xi.size());
                for (size_t i = 0; i < xi.size(); ++i) y[i] = mu * xi[i] / n;
                if (gi.offset(y)) mus = {mu, 2.0 * mu, 3.0 * mu};
            }
        if (mus.empty()) throw DomainError("ruled_check: direction is not aligned with the grid");
    }
    auto usable = usable_steps(gi, {xi}, mus);
    if (usable.empty()) throw DomainError("ruled_check: no step lands on grid nodes");

    RuledReport rep;
    rep.xi = xi;
    rep.report.suite = "ruled";
    const size_t nt = field.values.size(), n_nodes = field.grid.num_nodes();
    std::vector<double> dev(nt, 0.0);
    std::vector<size_t> node(nt, 0), step(nt, 0);
    parallel_for(nt, [&](size_t k) {
        const auto& u = field.values[k];
        for (size_t j = 0; j < usable.size(); ++j)
            for (size_t i = 0; i < n_nodes; ++i) {
                auto a = gi.shift(i, usable[j].off, 1), b = gi.shift(i, usable[j].off, -1);
                if (!a || !b) continue;
                double d = std::abs(2.0 * u[i] - u[*a] - u[*b]);
                if (d > dev[k]) dev[k] = d, node[k] = i, step[k] = j;
            }
    });
    for (size_t k = 0; k < nt; ++k) {
        rep.max_by_time.push_back(dev[k]);
        rep.report.add({"ruling_deviation_" + time_tag(field.grid.times[k]), dev[k], tolerance, tolerance,
                        dev[k] <= tolerance, field.grid.node(node[k]), ""});
        if (dev[k] >= rep.max_deviation) {
            rep.max_deviation = dev[k];
            rep.worst_x = field.grid.node(node[k]);
            rep.worst_mu = usable[step[k]].length;
            rep.worst_t = field.grid.times[k];
        }
    }
    rep.ruled = rep.max_deviation <= tolerance;
    return rep;
}

VerificationReport dichotomy_check(const SolutionField& field, double tolerance) {
    VerificationReport rep;
    rep.suite = "dichotomy";
    const int N = field.grid.N;
    GridIndex gi(field.grid);
    auto dirs = axis_and_diagonal_directions(N);

    // rulings among axes and diagonals
    std::vector<std::vector<bool>> ruled_at(dirs.size());
    for (size_t d = 0; d < dirs.size(); ++d) {
        try {
            RuledReport r = ruled_check(field, dirs[d], {}, tolerance);
            for (double m : r.max_by_time) ruled_at[d].push_back(m <= tolerance);
        } catch (const DomainError&) {
            ruled_at[d].assign(field.values.size(), false);
        }
    }
    // strictness: smallest second difference at the available step nearest
    // to 1, over all tested directions
    std::vector<double> candidates;
    for (int a = 0; a < N; ++a)
        for (int m = 1; m < field.grid.counts[a]; ++m) candidates.push_back(m * gi.spacing[a]);
    for (int a = 0; a < N && N > 1; ++a)
        for (int m = 1; m < field.grid.counts[a]; ++m) candidates.push_back(m * gi.spacing[a] * std::sqrt(2.0));
    for (size_t k = 0; k < field.values.size(); ++k) {
        const double t = field.grid.times[k];
        if (t <= 0.0) continue;
        Point ruling;
        for (size_t d = 0; d < dirs.size(); ++d)
            if (ruled_at[d][k] && ruling.empty()) ruling = dirs[d];
        double margin = kInf, step_used = 0.0;
        for (const Point& d : dirs) {
            auto steps = usable_steps(gi, {d}, candidates);
            if (steps.empty()) continue;
            auto best = std::min_element(steps.begin(), steps.end(), [](const Step& a, const Step& b) {
                return std::abs(std::log(a.length)) < std::abs(std::log(b.length));
            });
            SolutionField one = field;
            one.values = {field.values[k]};
            one.grid.times = {t};
            ConvexityReport c = convexity_check(one, {d}, {best->length}, tolerance);
            if (c.min_second_difference < margin) margin = c.min_second_difference, step_used = best->length;
        }
        const bool has_ruling = !ruling.empty();
        const bool strict = std::isfinite(margin) && margin > tolerance;
        // exactly one branch must hold
        rep.add({"dichotomy_" + time_tag(t), has_ruling ? 0.0 : margin, tolerance, tolerance, has_ruling != strict,
                 ruling,
                 has_ruling ? "ruled along a tested direction"
                            : "strict margin at |y| = " + std::to_string(step_used)});
    }
    return rep;
}

VerificationReport monotonicity_check(const FunctionSpec& u0, const std::vector<Point>& points,
                                      const std::vector<double>& times, const KernelParams& params, double tolerance,
                                      double strict_margin, int threads) {
    params.validate();
    if (!(params.s > 0.5)) throw DomainError("monotonicity_check needs s > 1/2");
    if (!u0.convex()) throw DomainError("monotonicity_check needs a convex datum");
    VerificationReport rep;
    rep.suite = "monotonicity";
    const size_t np = points.size();
    std::vector<double> ut(np * times.size());
    parallel_for(
        ut.size(),
        [&](size_t idx) { ut[idx] = time_derivative(u0, points[idx % np], times[idx / np], params); },
        threads);
    if (ut.empty()) throw DomainError("monotonicity_check: no samples");
    size_t worst = std::min_element(ut.begin(), ut.end()) - ut.begin();
    Point wp = points[worst % np];
    wp.push_back(times[worst / np]);
    rep.add({"min_u_t", ut[worst], 0.0, tolerance, ut[worst] >= -tolerance, wp, "u_t >= 0"});
    if (u0.affine_like()) {
        double m = 0.0;
        for (double v : ut) m = std::max(m, std::abs(v));
        rep.add({"affine_u_t_zero", m, 0.0, tolerance, m <= tolerance, {}, "u_t = 0 for affine data"});
    } else {
        size_t flat = 0;
        for (double v : ut)
            if (std::abs(v) <= tolerance) ++flat;
        rep.add({"strict_positivity", ut[worst], strict_margin, 0.0, ut[worst] >= strict_margin, wp,
                 "non-affine datum: u_t bounded away from 0"});
        rep.add({"no_flat_points", static_cast<double>(flat), 0.0, 0.0, flat == 0, {},
                 "u_t = 0 somewhere only for affine data"});
    }
    return rep;
}

VerificationReport classical_dichotomy_check(const FunctionSpec& u0, const GridSpec& grid,
                                             const ClassicalParams& params, double tolerance, int threads) {
    SolutionField field = solve_classical(u0, grid, params, threads);
    VerificationReport rep;
    rep.suite = "classical";
    std::vector<double> steps;
    for (int m = 1; m <= 4; ++m) steps.push_back(m * (grid.hi[0] - grid.lo[0]) / (grid.counts[0] - 1));
    std::vector<Point> dirs;
    for (int a = 0; a < grid.N; ++a) {
        Point d(grid.N, 0.0);
        d[a] = 1.0;
        dirs.push_back(d);
    }
    ConvexityReport c = convexity_check(field, dirs, steps, tolerance);
    for (auto rec : c.report.checks) {
        rec.name = "classical_" + rec.name;
        rep.add(rec);
    }
    if (grid.N > 1) rep.merge(dichotomy_check(field, tolerance));

    const size_t n = grid.num_nodes();
    std::vector<double> ut;
    std::vector<Point> where;
    for (size_t k = 0; k < grid.times.size(); ++k)
        if (grid.times[k] > 0.0)
            for (size_t i = 0; i < n; ++i) {
                where.push_back(grid.node(i));
                where.back().push_back(grid.times[k]);
            }
    ut.resize(where.size());
    parallel_for(
        where.size(),
        [&](size_t j) {
            Point x(where[j].begin(), where[j].end() - 1);
            ut[j] = classical_time_derivative(u0, x, where[j].back(), params).value;
        },
        threads);
    if (!ut.empty()) {
        size_t w = std::min_element(ut.begin(), ut.end()) - ut.begin();
        rep.add({"classical_min_u_t", ut[w], 0.0, tolerance, ut[w] >= -tolerance, where[w], "u_t >= 0"});
        if (u0.affine_like()) {
            double m = 0.0;
            for (double v : ut) m = std::max(m, std::abs(v));
            rep.add({"classical_affine_u_t_zero", m, 0.0, tolerance, m <= tolerance, {}, ""});
        }
    }
    return rep;
}

}  // namespace fracheat
