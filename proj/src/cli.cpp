#include "fracheat/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fracheat {

namespace {

constexpr double kPi = 3.14159265358979323846;

double to_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && *b == ' ') ++b;
    while (e > b && e[-1] == ' ') --e;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || b == e) throw ConfigError(what + ": not a number: '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// line and column of a byte offset
std::string locate(const std::string& text, size_t byte) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

double json_number(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError("field '" + field + "': expected a number");
    return j.get<double>();
}

int json_int(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number_integer()) throw ConfigError("field '" + field + "': expected an integer");
    return j.get<int>();
}

std::vector<double> json_numbers(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array()) throw ConfigError("field '" + field + "': expected an array of numbers");
    std::vector<double> out;
    for (size_t i = 0; i < j.size(); ++i) out.push_back(json_number(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

nlohmann::json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

GridSpec default_grid(int N) {
    GridSpec g;
    g.N = N;
    g.lo.assign(N, -5.0);
    g.hi.assign(N, 5.0);
    g.counts.assign(N, N == 1 ? 21 : 11);
    g.times = {0.0, 0.5, 1.0, 2.0};
    return g;
}

}  // namespace

// ---------------------------------------------------------------- config

void RunConfig::validate() const {
    if (!(params.s > 0.0 && params.s < 1.0)) throw ConfigError("field 's': must lie in (0,1), got " + std::to_string(params.s));
    if (params.N < 1 || params.N > 3) throw ConfigError("field 'N': must be 1, 2 or 3");
    try {
        params.quad.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("field 'quad': ") + e.what());
    }
    try {
        grid.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("field 'grid': ") + e.what());
    }
    if (grid.N != params.N) throw ConfigError("field 'grid': dimension differs from N");
    FunctionSpec u = [&] {
        try {
            return datum_spec();
        } catch (const DomainError& e) {
            throw ConfigError(std::string("field 'datum': ") + e.what());
        }
    }();
    if (u.dimension() != 0 && u.dimension() != params.N)
        throw ConfigError("field 'datum': " + datum + " is defined in dimension " + std::to_string(u.dimension()));
    // the heat-equation suite and the kernel suites do not solve the fractional problem
    static const std::vector<std::string> datum_free{"kernel-closed-form", "normalization", "kernel-bounds",
                                                     "multiplier",         "semigroup",     "classical",
                                                     "definiteness"};
    bool fractional = std::any_of(suites.begin(), suites.end(), [](const std::string& s) {
        return std::find(datum_free.begin(), datum_free.end(), s) == datum_free.end();
    });
    GrowthEnvelope e = u.effective_envelope();
    if (fractional && e.B > 0.0 && !(e.sigma(params.s) > 0.0))
        throw ConfigError("field 'datum': growth exponent " + std::to_string(e.beta) + " >= 2s = " +
                          std::to_string(2.0 * params.s) + " (sigma must lie in (0, 2s))");
    for (const auto& s : suites)
        if (!is_registered_suite(s)) throw ConfigError("field 'suites': unknown suite '" + s + "'");
    if (!(classical_B >= 0.0)) throw ConfigError("field 'classical_B': must be >= 0");
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) out.push_back(to_double(part, "list"));
    return out;
}

GridSpec parse_grid(const std::string& text, int N, std::vector<double> times) {
    auto axes = split(text, ',');
    if (static_cast<int>(axes.size()) != N)
        throw ConfigError("grid '" + text + "': expected " + std::to_string(N) + " axes of the form lo:hi:count");
    GridSpec g;
    g.N = N;
    for (const auto& a : axes) {
        auto f = split(a, ':');
        if (f.size() != 3) throw ConfigError("grid axis '" + a + "': expected lo:hi:count");
        g.lo.push_back(to_double(f[0], "grid lo"));
        g.hi.push_back(to_double(f[1], "grid hi"));
        double c = to_double(f[2], "grid count");
        if (c != std::floor(c) || c < 2 || c > 1e6) throw ConfigError("grid axis '" + a + "': count must be an integer >= 2");
        g.counts.push_back(static_cast<int>(c));
    }
    g.times = std::move(times);
    return g;
}

RunConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config is not valid JSON at " + locate(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> known{"N",     "s",     "datum",   "grid", "times",      "suites",
                                                "out",   "seed",  "threads", "quad", "classical_B"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("unknown field '" + it.key() + "'");
    if (!j.contains("s")) throw ConfigError("missing field 's'");
    if (!j.contains("datum")) throw ConfigError("missing field 'datum'");

    RunConfig cfg;
    if (j.contains("N")) cfg.params.N = json_int(j["N"], "N");
    if (cfg.params.N < 1 || cfg.params.N > 3) throw ConfigError("field 'N': must be 1, 2 or 3");
    cfg.params.s = json_number(j["s"], "s");
    if (!j["datum"].is_string()) throw ConfigError("field 'datum': expected a string");
    cfg.datum = j["datum"].get<std::string>();
    std::vector<double> times = default_grid(1).times;
    if (j.contains("times")) times = json_numbers(j["times"], "times");
    cfg.grid = default_grid(cfg.params.N);
    cfg.grid.times = times;
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        if (g.is_string()) {
            cfg.grid = parse_grid(g.get<std::string>(), cfg.params.N, times);
        } else if (g.is_object()) {
            for (auto it = g.begin(); it != g.end(); ++it)
                if (it.key() != "lo" && it.key() != "hi" && it.key() != "counts")
                    throw ConfigError("unknown field 'grid." + it.key() + "'");
            if (!g.contains("lo") || !g.contains("hi") || !g.contains("counts"))
                throw ConfigError("field 'grid': needs lo, hi and counts");
            cfg.grid.lo = json_numbers(g["lo"], "grid.lo");
            cfg.grid.hi = json_numbers(g["hi"], "grid.hi");
            cfg.grid.counts.clear();
            if (!g["counts"].is_array()) throw ConfigError("field 'grid.counts': expected an array of integers");
            for (size_t i = 0; i < g["counts"].size(); ++i)
                cfg.grid.counts.push_back(json_int(g["counts"][i], "grid.counts[" + std::to_string(i) + "]"));
        } else {
            throw ConfigError("field 'grid': expected \"lo:hi:count,...\" or an object");
        }
    }
    if (j.contains("suites")) {
        if (!j["suites"].is_array()) throw ConfigError("field 'suites': expected an array of names");
        cfg.suites.clear();
        for (size_t i = 0; i < j["suites"].size(); ++i) {
            if (!j["suites"][i].is_string()) throw ConfigError("field 'suites[" + std::to_string(i) + "]': expected a string");
            cfg.suites.push_back(j["suites"][i].get<std::string>());
        }
    }
    if (j.contains("out")) {
        if (!j["out"].is_string()) throw ConfigError("field 'out': expected a string");
        cfg.output_dir = j["out"].get<std::string>();
    }
    if (j.contains("seed")) {
        int s = json_int(j["seed"], "seed");
        if (s < 0) throw ConfigError("field 'seed': must be >= 0");
        cfg.seed = static_cast<unsigned>(s);
    }
    if (j.contains("threads")) cfg.threads = json_int(j["threads"], "threads");
    if (j.contains("classical_B")) cfg.classical_B = json_number(j["classical_B"], "classical_B");
    if (j.contains("quad")) {
        const auto& q = j["quad"];
        if (!q.is_object()) throw ConfigError("field 'quad': expected an object");
        for (auto it = q.begin(); it != q.end(); ++it) {
            if (it.key() == "abs_tol") cfg.params.quad.abs_tol = json_number(*it, "quad.abs_tol");
            else if (it.key() == "rel_tol") cfg.params.quad.rel_tol = json_number(*it, "quad.rel_tol");
            else if (it.key() == "max_subdivisions") cfg.params.quad.max_subdivisions = json_int(*it, "quad.max_subdivisions");
            else throw ConfigError("unknown field 'quad." + it.key() + "'");
        }
    }
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------- tables

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json Table::to_json() const {
    nlohmann::json j;
    j["columns"] = columns;
    auto rows_j = nlohmann::json::array();
    for (const auto& r : rows) {
        auto row = nlohmann::json::array();
        for (const auto& c : r) {
            if (const double* d = std::get_if<double>(&c)) row.push_back(num(*d));
            else row.push_back(std::get<std::string>(c));
        }
        rows_j.push_back(row);
    }
    j["rows"] = rows_j;
    return j;
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    // nlohmann::json objects are std::map backed, so keys come out sorted
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void emit_table(const Table& table, const std::filesystem::path& path, TableFormat format) {
    if (format == TableFormat::Json) {
        write_json(table.to_json(), path);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << csv_escape(table.columns[i]);
    out << '\n';
    for (const auto& r : table.rows) {
        if (r.size() != table.columns.size()) throw std::runtime_error(path.string() + ": row width differs from header");
        for (size_t i = 0; i < r.size(); ++i) {
            if (i) out << ',';
            if (const double* d = std::get_if<double>(&r[i])) out << format_number(*d);
            else out << csv_escape(std::get<std::string>(r[i]));
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Table report_table(const VerificationReport& report) {
    Table t;
    t.columns = {"suite", "name", "measured", "bound", "tolerance", "pass", "worst_point", "note"};
    for (const auto& c : report.checks) {
        std::string wp;
        for (size_t i = 0; i < c.worst_point.size(); ++i) wp += (i ? " " : "") + format_number(c.worst_point[i]);
        t.rows.push_back({report.suite, c.name, c.measured, c.bound, c.tolerance, std::string(c.pass ? "true" : "false"),
                          wp, c.note});
    }
    return t;
}

Table field_table(const SolutionField& field) {
    Table t;
    t.columns.push_back("t");
    for (int a = 0; a < field.grid.N; ++a) t.columns.push_back("x" + std::to_string(a + 1));
    t.columns.push_back("u");
    t.columns.push_back("err_est");
    for (size_t k = 0; k < field.values.size(); ++k)
        for (size_t i = 0; i < field.values[k].size(); ++i) {
            std::vector<Cell> row{field.grid.times[k]};
            for (double c : field.grid.node(i)) row.push_back(c);
            row.push_back(field.values[k][i]);
            row.push_back(field.errors[k][i]);
            t.rows.push_back(std::move(row));
        }
    return t;
}

// ---------------------------------------------------------------- suites

namespace {

using SuiteFn = VerificationReport (*)(const RunConfig&);

VerificationReport suite_kernel_closed_form(const RunConfig&) {
    VerificationReport rep;
    for (int N : {1, 2}) {
        KernelParams p;
        p.N = N;
        p.s = 0.5;
        // s = 1/2: Poisson kernel c_N t / (t^2 + |x|^2)^{(N+1)/2}
        const double c = N == 1 ? 1.0 / kPi : 1.0 / (2.0 * kPi);
        double worst = 0.0;
        Point wp;
        for (double t : {0.1, 1.0, 10.0})
            for (int k = 0; k <= 50; ++k) {
                double r = static_cast<double>(k);
                Point x(N, 0.0);
                x[0] = r;
                double ref = c * t / std::pow(t * t + r * r, 0.5 * (N + 1));
                double rel = std::abs(heat_kernel(p, x, t) - ref) / ref;
                if (rel > worst) worst = rel, wp = {r, t};
            }
        rep.add({"N=" + std::to_string(N) + "_max_rel_error", worst, 1e-6, 1e-6, worst <= 1e-6, wp, "|x| in [0,50]"});
    }
    return rep;
}

VerificationReport suite_normalization(const RunConfig&) {
    VerificationReport rep;
    for (int N : {1, 2, 3})
        for (double s : {0.3, 0.5, 0.8})
            for (double t : {0.1, 1.0, 10.0}) {
                KernelParams p;
                p.N = N;
                p.s = s;
                MassResult m = kernel_mass(p, t);
                double gap = std::abs(m.total - 1.0);
                char name[64];
                std::snprintf(name, sizeof name, "mass_N%d_s%g_t%g", N, s, t);
                rep.add({name, m.total, 1.0, 1e-6, gap <= 1e-6, {}, ""});
            }
    return rep;
}

VerificationReport suite_kernel_bounds(const RunConfig& cfg) {
    std::vector<std::pair<Point, double>> grid;
    for (double t : {0.1, 1.0, 10.0})
        for (double r : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
            Point x(cfg.params.N, 0.0);
            x[0] = r;
            grid.push_back({x, t});
        }
    return verify_kernel_bounds(cfg.params, grid);
}

VerificationReport suite_multiplier(const RunConfig& cfg) {
    VerificationReport rep;
    const int N = cfg.params.N;
    const double s = cfg.params.s;
    for (double k : {0.5, 1.0, 2.0}) {
        Point xi(N, 0.0);
        xi[0] = k;
        if (N > 1) {
            xi[0] = k * 0.6;
            xi[1] = k * 0.8;
        }
        auto u = FunctionSpec::cosine(xi);
        double worst = 0.0;
        Point wp;
        for (int j = 0; j < 5; ++j) {
            Point x(N, 0.0);
            for (int a = 0; a < N; ++a) x[a] = 0.37 * j - 0.5 * a;
            double err = std::abs(frac_laplacian(u, x, s, cfg.params.quad).value - std::pow(k, 2.0 * s) * u.value(x));
            if (err >= worst) worst = err, wp = x;
        }
        rep.add({"cosine_|xi|=" + format_number(k), worst, 1e-4, 1e-4, worst <= 1e-4, wp, "|xi|^{2s} cos(xi.x)"});
    }
    return rep;
}

// nodes used for residual sampling: first, middle and last
std::vector<size_t> sample_nodes(const GridSpec& g) {
    size_t n = g.num_nodes();
    std::vector<size_t> out{0, n / 2, n - 1};
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

VerificationReport suite_solution(const RunConfig& cfg) {
    VerificationReport rep;
    FunctionSpec u = cfg.datum_spec();
    SolutionField f = solve_canonical(u, cfg.grid, cfg.params, cfg.threads);
    const size_t n = cfg.grid.num_nodes();
    for (size_t k = 0; k < cfg.grid.times.size(); ++k) {
        const double t = cfg.grid.times[k];
        if (t == 0.0) {
            bool exact = true;
            for (size_t i = 0; i < n; ++i) exact = exact && f.values[k][i] == u.value(cfg.grid.node(i));
            rep.add({"datum_at_t0", exact ? 0.0 : 1.0, 0.0, 0.0, exact, {}, "u(x,0) = u0(x) exactly"});
            continue;
        }
        double factor = std::numeric_limits<double>::quiet_NaN();
        if (u.family() == Family::Cosine) factor = std::exp(-std::pow(norm(u.params()), 2.0 * cfg.params.s) * t);
        if (u.affine_like()) factor = 1.0;
        if (std::isfinite(factor)) {
            double worst = 0.0;
            Point wp;
            for (size_t i = 0; i < n; ++i) {
                Point x = cfg.grid.node(i);
                double exact = u.affine_like() ? u.value(x) : factor * u.value(x);
                double err = std::abs(f.values[k][i] - exact);
                if (err >= worst) worst = err, wp = x;
            }
            wp.push_back(t);
            rep.add({"closed_form_t=" + format_number(t), worst, 1e-4, 1e-4, worst <= 1e-4, wp,
                     u.affine_like() ? "u = u0" : "exp(-|xi|^{2s} t) u0"});
        }
    }
    // residual at a few nodes at the last positive time
    const double t_last = cfg.grid.times.back();
    if (t_last > 0.0) {
        for (size_t i : sample_nodes(cfg.grid)) {
            Point x = cfg.grid.node(i);
            ResidualResult r = pde_residual_detail(u, x, t_last, cfg.params);
            Point wp = x;
            wp.push_back(t_last);
            rep.add({"residual_node" + std::to_string(i), r.residual, 1e-3, 1e-3, std::abs(r.residual) <= 1e-3, wp,
                     "u_t + (-Delta)^s u"});
        }
    }
    return rep;
}

VerificationReport suite_semigroup(const RunConfig& cfg) {
    KernelParams p = cfg.params;
    p.N = 1;
    return semigroup_check(p, 0.5, 0.7, 20.0, 81, 1e-5, cfg.threads);
}

VerificationReport suite_maxprinciple(const RunConfig& cfg) {
    FunctionSpec u = cfg.datum_spec();
    SolutionField f = solve_canonical(u, cfg.grid, cfg.params, cfg.threads);
    return max_principle_check(f, u);
}

std::vector<double> grid_steps(const GridSpec& g) {
    const double h = (g.hi[0] - g.lo[0]) / (g.counts[0] - 1);
    std::vector<double> out{h, 2 * h, 3 * h, 1.0};
    if (g.N > 1) out.push_back(h * std::sqrt(2.0));
    return out;
}

VerificationReport suite_geosol(const RunConfig& cfg) {
    VerificationReport rep;
    FunctionSpec u = cfg.datum_spec();
    if (!u.convex()) throw DomainError("geosol needs a convex datum, got " + cfg.datum);
    SolutionField f = solve_canonical(u, cfg.grid, cfg.params, cfg.threads);
    if (u.affine_like()) {
        double worst = 0.0;
        for (size_t k = 0; k < f.values.size(); ++k)
            for (size_t i = 0; i < f.values[k].size(); ++i)
                worst = std::max(worst, std::abs(f.values[k][i] - u.value(cfg.grid.node(i))));
        rep.add({"affine_u_equals_u0", worst, 0.0, kGeometricTolerance, worst <= kGeometricTolerance, {}, ""});
    }
    ConvexityReport c = convexity_check(f, axis_and_diagonal_directions(cfg.params.N), grid_steps(cfg.grid));
    rep.merge(c.report);
    if (u.family() == Family::Ruled) {
        const Point& n = u.params();
        RuledReport r = ruled_check(f, {-n[1], n[0]});
        r.report.suite = "ruled_along_datum";
        rep.merge(r.report);
    }
    rep.merge(dichotomy_check(f));
    if (cfg.params.s > 0.5) {
        std::vector<Point> pts;
        for (size_t i : sample_nodes(cfg.grid)) pts.push_back(cfg.grid.node(i));
        std::vector<double> ts;
        for (double t : cfg.grid.times)
            if (t > 0.0) ts.push_back(t);
        if (!ts.empty()) rep.merge(monotonicity_check(u, pts, ts, cfg.params, kGeometricTolerance, 1e-4, cfg.threads));
    }
    return rep;
}

VerificationReport suite_classical(const RunConfig& cfg) {
    FunctionSpec u = cfg.datum_spec();
    ClassicalParams cp;
    cp.N = cfg.params.N;
    cp.B = cfg.classical_B;
    cp.quad = cfg.params.quad;
    VerificationReport rep = classical_dichotomy_check(u, cfg.grid, cp, kGeometricTolerance, cfg.threads);
    if (u.family() == Family::Quadratic && u.offset().empty()) {
        // c|x|^2 + 2 N c t
        const double c = u.params()[0];
        SolutionField f = solve_classical(u, cfg.grid, cp, cfg.threads);
        double worst = 0.0;
        for (size_t k = 0; k < f.values.size(); ++k)
            for (size_t i = 0; i < f.values[k].size(); ++i) {
                Point x = cfg.grid.node(i);
                worst = std::max(worst, std::abs(f.values[k][i] - (u.value(x) + 2.0 * cp.N * c * cfg.grid.times[k])));
            }
        rep.add({"heat_polynomial", worst, 0.0, 1e-6, worst <= 1e-6, {}, "c|x|^2 + 2Nct"});
    }
    return rep;
}

VerificationReport suite_definiteness(const RunConfig&) {
    VerificationReport rep;
    struct Case {
        const char* name;
        FunctionSpec u;
        double s;
        std::optional<Point> x;
        Definiteness expect;
    };
    const std::vector<Case> table{
        {"affine_s<=1/2", FunctionSpec::affine(0.0, {1.0}), 0.4, std::nullopt, Definiteness::Indefinite},
        {"affine_s>1/2", FunctionSpec::affine(0.0, {1.0}), 0.7, std::nullopt, Definiteness::IdenticallyZero},
        {"piecewise_lambda<=0", FunctionSpec::piecewise_linear_1d(-1.0), 0.4, Point{0.5}, Definiteness::NegInfinite},
        {"piecewise_lambda_in_(0,1)", FunctionSpec::piecewise_linear_1d(0.5), 0.4, Point{0.5}, Definiteness::Indefinite},
        {"convex_s>1/2", FunctionSpec::abs_power(1.2), 0.75, std::nullopt, Definiteness::ConvergesEverywhere},
        {"constant", FunctionSpec::constant(1.0), 0.3, std::nullopt, Definiteness::IdenticallyZero},
    };
    for (const auto& c : table) {
        DefinitenessResult r = classify_definiteness(c.u, c.s, c.x);
        rep.add({c.name, static_cast<double>(r.kind), static_cast<double>(c.expect), 0.0, r.kind == c.expect, {},
                 std::string(to_string(r.kind)) + ": " + r.reason});
    }
    return rep;
}

VerificationReport suite_vanish(const RunConfig& cfg) {
    return vanish_at_infinity_check(cfg.datum_spec(), cfg.params.s, {1, 2, 5, 10, 20, 50, 100}, cfg.params.N, 0.1,
                                    cfg.params.quad);
}

VerificationReport suite_envelope(const RunConfig& cfg) {
    std::vector<double> ts;
    for (double t : cfg.grid.times)
        if (t > 0.0) ts.push_back(t);
    if (ts.size() < 2) throw DomainError("envelope suite needs at least two positive times");
    return envelope_propagate(cfg.datum_spec(), cfg.params, ts, cfg.threads).report;
}

VerificationReport suite_continuity(const RunConfig& cfg) {
    Point x0(cfg.params.N, 0.0);
    for (int a = 0; a < cfg.params.N; ++a) x0[a] = 0.5 * (cfg.grid.lo[a] + cfg.grid.hi[a]);
    return initial_continuity_check(cfg.datum_spec(), x0, cfg.params);
}

struct SuiteEntry {
    SuiteInfo info;
    SuiteFn fn;
};

const std::vector<SuiteEntry>& suite_table() {
    static const std::vector<SuiteEntry> table{
        {{"kernel-closed-form", "s = 1/2, N = 1,2: kernel equals the Poisson kernel to 1e-6 relative"},
         suite_kernel_closed_form},
        {{"normalization", "unit mass of the kernel for 27 (N, s, t) combinations, to 1e-6"}, suite_normalization},
        {{"kernel-bounds", "two-sided kernel estimate and derivative bounds on a sample grid"}, suite_kernel_bounds},
        {{"multiplier", "(-Delta)^s cos(xi.x) = |xi|^{2s} cos(xi.x) to 1e-4"}, suite_multiplier},
        {{"solution", "solve the datum on the grid; closed forms where known; PDE residual <= 1e-3"}, suite_solution},
        {{"semigroup", "p(.,0.5) * p(.,0.7) = p(.,1.2) to 1e-5 on [-20,20]"}, suite_semigroup},
        {{"maxprinciple", "weak maximum principle for a bounded datum"}, suite_maxprinciple},
        {{"geosol", "convex datum: convexity, ruling/strict convexity dichotomy, u_t >= 0"}, suite_geosol},
        {{"classical", "heat equation (s = 1) with exp(B|x|^2) data on (0, 1/(4B))"}, suite_classical},
        {{"definiteness", "classification of the principal value for affine, kinked and convex data"},
         suite_definiteness},
        {{"vanish", "decay of (-Delta)^s u0 from |x| = 1 to |x| = 100"}, suite_vanish},
        {{"envelope", "growth envelope A(t) + B|x|^{2s-sigma} of the solution"}, suite_envelope},
        {{"continuity", "u(x_n, t_n) -> u0(x0) along x_n = x0 + 2^-n e1, t_n = 4^-n"}, suite_continuity},
    };
    return table;
}

}  // namespace

const std::vector<SuiteInfo>& registered_suites() {
    static const std::vector<SuiteInfo> infos = [] {
        std::vector<SuiteInfo> v;
        for (const auto& e : suite_table()) v.push_back(e.info);
        return v;
    }();
    return infos;
}

bool is_registered_suite(const std::string& name) {
    for (const auto& s : registered_suites())
        if (s.name == name) return true;
    return false;
}

SuiteOutcome run_suite(const RunConfig& cfg, const std::string& suite) {
    const SuiteEntry* entry = nullptr;
    for (const auto& e : suite_table())
        if (e.info.name == suite) entry = &e;
    if (!entry) throw ConfigError("unknown suite '" + suite + "'");
    SuiteOutcome out;
    try {
        out.report = entry->fn(cfg);
    } catch (const std::exception& e) {
        out.report.checks.clear();
        out.report.add({"error", std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, false, {}, e.what()});
    }
    out.report.suite = suite;
    std::filesystem::create_directories(cfg.output_dir);
    auto json_path = cfg.output_dir / (suite + ".json");
    auto csv_path = cfg.output_dir / (suite + ".csv");
    nlohmann::json j = out.report.to_json();
    j["config"] = {{"N", cfg.params.N}, {"s", cfg.params.s}, {"datum", cfg.datum}, {"seed", cfg.seed}};
    write_json(j, json_path);
    emit_table(report_table(out.report), csv_path, TableFormat::Csv);
    out.files = {json_path, csv_path};
    return out;
}

std::vector<std::filesystem::path> run_solve(const RunConfig& cfg, const std::filesystem::path& csv_path) {
    FunctionSpec u = cfg.datum_spec();
    SolutionField f = solve_canonical(u, cfg.grid, cfg.params, cfg.threads);
    if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
    emit_table(field_table(f), csv_path, TableFormat::Csv);

    nlohmann::json m;
    m["params"] = {{"N", cfg.params.N},
                   {"s", cfg.params.s},
                   {"datum", cfg.datum},
                   {"abs_tol", cfg.params.quad.abs_tol},
                   {"rel_tol", cfg.params.quad.rel_tol}};
    m["grid"] = {{"lo", cfg.grid.lo}, {"hi", cfg.grid.hi}, {"counts", cfg.grid.counts}, {"times", cfg.grid.times}};
    std::vector<double> ts;
    for (double t : cfg.grid.times)
        if (t > 0.0) ts.push_back(t);
    if (ts.size() >= 2) {
        try {
            EnvelopeTrace tr = envelope_propagate(u, cfg.params, ts, cfg.threads);
            nlohmann::json a = nlohmann::json::array();
            for (double v : tr.A) a.push_back(num(v));
            m["envelope"] = {{"times", tr.times},
                             {"A", a},
                             {"B", tr.B},
                             {"fitted_exponent", num(tr.fitted_exponent)},
                             {"exponent_bound", num(tr.exponent_bound)},
                             {"pass", tr.report.overall_pass()}};
        } catch (const std::exception& e) {
            m["envelope"] = {{"error", e.what()}};
        }
    }
    if (!ts.empty()) {
        nlohmann::json res = nlohmann::json::array();
        double worst = 0.0;
        for (size_t i : sample_nodes(cfg.grid)) {
            Point x = cfg.grid.node(i);
            try {
                ResidualResult r = pde_residual_detail(u, x, ts.back(), cfg.params);
                worst = std::max(worst, std::abs(r.residual));
                res.push_back({{"x", x}, {"t", ts.back()}, {"residual", r.residual}, {"u_t", r.u_t}});
            } catch (const std::exception& e) {
                res.push_back({{"x", x}, {"t", ts.back()}, {"error", e.what()}});
            }
        }
        m["residual"] = {{"samples", res}, {"max_abs", worst}};
    }
    auto manifest = csv_path;
    manifest.replace_extension(".manifest.json");
    write_json(m, manifest);
    return {csv_path, manifest};
}

std::string help_footer() {
    std::ostringstream os;
    os << "Datum grammar (FunctionSpec):\n"
          "  constant:c            u = c\n"
          "  affine:a,xi1[,xi2..]  u = a + xi.x\n"
          "  quadratic:c           u = c|x|^2\n"
          "  cosine:xi1[,xi2..]    u = cos(xi.x)\n"
          "  gaussian:a            u = exp(-a|x|^2)\n"
          "  abs_power:beta        u = (1 + |x|^2)^{beta/2}, beta < 2\n"
          "  piecewise_linear_1d:l u = x (x >= 0), l x (x < 0), l < 1\n"
          "  ruled:n1,n2/<datum>   u = h(n.x) in 2-D, h a 1-D datum\n"
          "  suffix @h1[,h2..]     translate: u(x - h)\n"
          "Suites:\n";
    for (const auto& s : registered_suites()) os << "  " << s.name << "  " << s.description << "\n";
    os << "Environment: FRACHEAT_THREADS caps worker threads (default 1).\n";
    return os.str();
}

// ---------------------------------------------------------------- CLI

namespace {

int effective_threads(int flag) {
    int env = default_threads();
    if (flag <= 0) return env;
    return std::getenv("FRACHEAT_THREADS") ? std::min(flag, env) : flag;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct CommonFlags {
    std::string config, datum, grid, times, out;
    int N = 0;
    double s = std::numeric_limits<double>::quiet_NaN();
    int threads = 0;
    int seed = -1;
    double classical_B = std::numeric_limits<double>::quiet_NaN();

    void attach(CLI::App* app, bool with_out = true) {
        app->add_option("--config", config, "JSON config file (flags override it)");
        app->add_option("--datum", datum, "datum spec, see grammar below");
        app->add_option("--s", s, "fractional order in (0,1)");
        app->add_option("--N", N, "dimension (1-3)");
        app->add_option("--grid", grid, "lo:hi:count per axis, comma separated");
        app->add_option("--times", times, "comma separated times");
        app->add_option("--threads", threads, "worker threads (capped by FRACHEAT_THREADS)");
        app->add_option("--seed", seed, "sample placement seed");
        app->add_option("--classical-B", classical_B, "exp(B|x|^2) growth rate for the classical suite");
        if (with_out) app->add_option("--out", out, "output directory");
    }

    RunConfig build(const std::vector<std::string>& suites = {}) const {
        nlohmann::json j = nlohmann::json::object();
        if (!config.empty()) {
            try {
                j = nlohmann::json::parse(read_file(config));
            } catch (const nlohmann::json::parse_error&) {
                parse_config(read_file(config));  // rethrows with a located message
            }
        }
        if (!datum.empty()) j["datum"] = datum;
        if (std::isfinite(s)) j["s"] = s;
        if (N > 0) j["N"] = N;
        if (!grid.empty()) j["grid"] = grid;
        if (!times.empty()) j["times"] = parse_list(times);
        if (seed >= 0) j["seed"] = seed;
        if (std::isfinite(classical_B)) j["classical_B"] = classical_B;
        if (!out.empty()) j["out"] = out;
        if (!suites.empty()) j["suites"] = suites;
        if (!j.contains("s")) j["s"] = 0.75;
        if (!j.contains("datum")) j["datum"] = "cosine:1";
        RunConfig cfg = parse_config(j.dump());
        cfg.threads = effective_threads(threads > 0 ? threads : cfg.threads);
        return cfg;
    }
};

void print_report(const VerificationReport& rep) {
    for (const auto& c : rep.checks)
        std::printf("  %-44s %s  measured=%s bound=%s%s%s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL",
                    format_number(c.measured).c_str(), format_number(c.bound).c_str(), c.note.empty() ? "" : "  ",
                    c.note.c_str());
}

Point parse_point(const std::string& s) { return parse_list(s); }

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"fracheat: fractional heat equation toolkit"};
    app.footer(help_footer());
    app.require_subcommand(1);

    // kernel
    auto* kernel = app.add_subcommand("kernel", "tabulate F_N(r) and p(r e1, t)");
    int kN = 1;
    double ks = 0.5;
    std::string kr = "0,0.5,1,2,5,10", kt = "1", kout;
    kernel->add_option("--N", kN, "dimension");
    kernel->add_option("--s", ks, "fractional order");
    kernel->add_option("--r", kr, "comma separated radii");
    kernel->add_option("--t", kt, "comma separated times");
    kernel->add_option("--out", kout, "CSV path (default stdout)");

    // fraclap
    auto* fl = app.add_subcommand("fraclap", "fractional Laplacian of a datum");
    fl->require_subcommand(1);
    std::string fdatum = "cosine:1", fx = "0";
    double fs = 0.5;
    auto* fl_eval = fl->add_subcommand("eval", "evaluate (-Delta)^s u at a point");
    auto* fl_class = fl->add_subcommand("classify", "classify the principal value (affine, kinked, convex data)");
    auto* fl_van = fl->add_subcommand("vanish-check", "decay of (-Delta)^s u from |x| = 1 to 100");
    std::string fradii = "1,2,5,10,20,50,100";
    int fN = 1;
    double ftol = 0.1;
    bool fclass_at = false;
    for (auto* sc : {fl_eval, fl_class, fl_van}) {
        sc->add_option("--datum", fdatum, "datum spec");
        sc->add_option("--s", fs, "fractional order");
    }
    fl_eval->add_option("--x", fx, "comma separated point");
    fl_class->add_option("--x", fx, "comma separated point")->each([&](const std::string&) { fclass_at = true; });
    fl_van->add_option("--radii", fradii, "comma separated radii");
    fl_van->add_option("--N", fN, "dimension");
    fl_van->add_option("--rel-tol", ftol, "pass threshold on last/first");

    // solve
    auto* solve = app.add_subcommand("solve", "canonical solution on a grid: CSV (t, x.., u, err_est) + manifest");
    CommonFlags sflags;
    sflags.attach(solve, false);
    std::string sout = "solution.csv";
    solve->add_option("--out", sout, "CSV path; the manifest goes to <stem>.manifest.json");

    // verify
    auto* verify = app.add_subcommand("verify", "run verification suites; exit code 0 iff all pass");
    CommonFlags vflags;
    vflags.attach(verify);
    std::vector<std::string> vsuites;
    verify->add_option("suites", vsuites, "suite names, or 'all'");

    // bench
    auto* bench = app.add_subcommand("bench", "time representative evaluations");
    int bthreads = 0;
    bench->add_option("--threads", bthreads, "worker threads (capped by FRACHEAT_THREADS)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (kernel->parsed()) {
            KernelParams p;
            p.N = kN;
            p.s = ks;
            p.validate();
            Table t;
            t.columns = {"r", "t", "F_N", "p", "method"};
            for (double tt : parse_list(kt))
                for (double r : parse_list(kr)) {
                    RadialValue rv = f_radial_detail(p, r * std::pow(tt, -0.5 / ks));
                    Point x(kN, 0.0);
                    x[0] = r;
                    t.rows.push_back({r, tt, rv.value, heat_kernel(p, x, tt), std::string(to_string(rv.method))});
                }
            if (kout.empty()) {
                auto tmp = std::filesystem::temp_directory_path() / "fracheat_kernel.csv";
                emit_table(t, tmp, TableFormat::Csv);
                std::cout << read_file(tmp.string());
                std::filesystem::remove(tmp);
            } else {
                emit_table(t, kout, TableFormat::Csv);
            }
            return 0;
        }
        if (fl->parsed()) {
            FunctionSpec u = FunctionSpec::parse(fdatum);
            nlohmann::json j;
            j["datum"] = fdatum;
            j["s"] = fs;
            if (fl_eval->parsed()) {
                Point x = parse_point(fx);
                FracLapResult r = frac_laplacian(u, x, fs);
                j["x"] = x;
                j["value"] = r.value;
                j["error_estimate"] = r.error_estimate;
                j["near_part"] = r.near_part;
                j["tail_part"] = r.tail_part;
                j["split_radius"] = r.split_radius;
                std::cout << j.dump(2) << "\n";
                return 0;
            }
            if (fl_class->parsed()) {
                std::optional<Point> x;
                if (fclass_at) x = parse_point(fx);
                DefinitenessResult r = classify_definiteness(u, fs, x);
                j["kind"] = to_string(r.kind);
                j["reason"] = r.reason;
                if (r.at) j["at"] = *r.at;
                std::cout << j.dump(2) << "\n";
                return 0;
            }
            VerificationReport rep = vanish_at_infinity_check(u, fs, parse_list(fradii), fN, ftol);
            std::cout << rep.to_json().dump(2) << "\n";
            return rep.overall_pass() ? 0 : 1;
        }
        if (solve->parsed()) {
            RunConfig cfg = sflags.build();
            for (const auto& f : run_solve(cfg, sout)) std::printf("wrote %s\n", f.string().c_str());
            return 0;
        }
        if (verify->parsed()) {
            if (std::find(vsuites.begin(), vsuites.end(), "all") != vsuites.end()) {
                vsuites.clear();
                for (const auto& s : registered_suites()) vsuites.push_back(s.name);
            }
            RunConfig cfg = vflags.build(vsuites);
            bool all = true;
            for (const auto& name : cfg.suites) {
                SuiteOutcome o = run_suite(cfg, name);
                bool pass = o.report.overall_pass();
                all = all && pass;
                std::printf("%s %s\n", pass ? "PASS" : "FAIL", name.c_str());
                print_report(o.report);
            }
            return all ? 0 : 1;
        }
        if (bench->parsed()) {
            const int threads = effective_threads(bthreads);
            auto time_it = [](const char* label, auto&& fn) {
                auto t0 = std::chrono::steady_clock::now();
                fn();
                double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                std::printf("%-40s %10.4f s\n", label, dt);
            };
            KernelParams p1;
            p1.N = 1;
            p1.s = 0.75;
            KernelParams p3 = p1;
            p3.N = 3;
            time_it("profile table N=1 s=0.75", [&] { shared_profile_table(p1); });
            time_it("heat_kernel x 1000 (table)", [&] {
                auto tab = shared_profile_table(p1);
                double acc = 0.0;
                for (int i = 0; i < 1000; ++i) acc += heat_kernel(*tab, {0.01 * i}, 1.0);
                if (!std::isfinite(acc)) std::puts("non-finite");
            });
            time_it("frac_laplacian gaussian N=3", [&] { frac_laplacian(FunctionSpec::gaussian(), {0.3, 0.2, 0.1}, 0.6); });
            time_it("solve_canonical abs_power 41 nodes x 3", [&] {
                solve_canonical(FunctionSpec::abs_power(1.2), GridSpec::line(-5, 5, 41, {0.5, 1.0, 2.0}), p1, threads);
            });
            time_it("pde_residual gaussian N=1", [&] { pde_residual(FunctionSpec::gaussian(), {0.5}, 1.0, p1); });
            std::printf("threads: %d\n", threads);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}

}  // namespace fracheat
