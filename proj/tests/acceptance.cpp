// One PASS/FAIL line per acceptance criterion; exit code 1 if any fails.
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "fracheat/analysis.hpp"

using namespace fracheat;

namespace {

constexpr double kPi = 3.14159265358979323846;

int failures = 0;

KernelParams kp(int N, double s) {
    KernelParams p;
    p.N = N;
    p.s = s;
    return p;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

void criterion(int id, const char* title, const std::function<bool(std::string&)>& body) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        detail += std::string(" exception: ") + e.what();
    }
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!pass) ++failures;
    std::printf("%s %2d %s: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, title, detail.c_str(), dt);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// (2 pi)^{-N} |S^{N-1}| int_0^inf rho^{N-1} exp(-rho) d rho: p(0, 1) for s = 1/2
double poisson_constant_oracle(int N) {
    double area = 2.0 * std::pow(kPi, 0.5 * N) / boost::math::tgamma(0.5 * N);
    auto f = [N](double r) { return std::pow(r, N - 1) * std::exp(-r); };
    double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 60.0, 15, 1e-14);
    return std::pow(2.0 * kPi, -N) * area * I;
}

// 7-point central differences: O(h^6) for k = 1, 2 and O(h^4) for k = 3
double fd_derivative(const std::function<double(double)>& f, int k, double r, double h) {
    const double f3 = f(r + 3 * h), f2 = f(r + 2 * h), f1 = f(r + h), f0 = f(r);
    const double m1 = f(r - h), m2 = f(r - 2 * h), m3 = f(r - 3 * h);
    if (k == 1) return (f3 - 9 * f2 + 45 * f1 - 45 * m1 + 9 * m2 - m3) / (60 * h);
    if (k == 2) return (2 * f3 - 27 * f2 + 270 * f1 - 490 * f0 + 270 * m1 - 27 * m2 + 2 * m3) / (180 * h * h);
    return (-f3 + 8 * f2 - 13 * f1 + 13 * m1 - 8 * m2 + m3) / (8 * h * h * h);
}

}  // namespace

int main() {
    criterion(1, "closed-form kernel at s = 1/2", [](std::string& d) {
        bool ok = true;
        for (int N : {1, 2}) {
            const double c = poisson_constant_oracle(N);
            ok = ok && rel(c, N == 1 ? 1.0 / kPi : 1.0 / (2.0 * kPi)) < 1e-12;
            double worst = 0.0;
            for (double t : {0.1, 1.0, 10.0})
                for (int i = 0; i <= 500; ++i) {
                    double r = 0.1 * i;
                    Point x(N, 0.0);
                    x[0] = r;
                    worst = std::max(worst, rel(heat_kernel(kp(N, 0.5), x, t), c * t / std::pow(t * t + r * r, 0.5 * (N + 1))));
                }
            d += fmt("N=%g max rel %.2e; ", N, worst);
            ok = ok && worst <= 1e-6;
        }
        return ok;
    });

    criterion(2, "kernel mass", [](std::string& d) {
        double worst = 0.0;
        int n = 0;
        for (int N : {1, 2, 3})
            for (double s : {0.3, 0.5, 0.8})
                for (double t : {0.1, 1.0, 10.0}) {
                    worst = std::max(worst, std::abs(kernel_mass(kp(N, s), t).total - 1.0));
                    ++n;
                }
        d = fmt("%g combinations, max |mass - 1| = %.2e", n, worst);
        return n == 27 && worst <= 1e-6;
    });

    criterion(3, "two-sided kernel estimate", [](std::string& d) {
        bool ok = true;
        for (int N : {1, 2, 3})
            for (double s : {0.3, 0.5, 0.8}) {
                std::vector<std::pair<Point, double>> grid;
                for (double t : {0.01, 0.1, 1.0, 10.0, 100.0})
                    for (double r : {0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 200.0}) {
                        Point x(N, 0.0);
                        x[0] = r;
                        grid.push_back({x, t});
                    }
                KernelBoundsSummary sum;
                bool pass = verify_kernel_bounds(kp(N, s), grid, &sum).overall_pass();
                // ratios are functions of |x| t^{-1/2s} only; the interval must be nondegenerate and finite
                pass = pass && sum.p_ratio_min > 1e-3 && sum.p_ratio_max < 1e3 && sum.grad_ratio_max < 1e3 &&
                       sum.hess_ratio_max < 1e3 && sum.pt_ratio_max < 1e3;
                if (N == 1 && s == 0.5) {
                    pass = pass && sum.p_ratio_min >= 1.0 / (2.0 * kPi) - 1e-12 && sum.p_ratio_max <= 1.0 / kPi + 1e-12;
                    d += fmt("Cauchy ratio in [%.4f, %.4f]; ", sum.p_ratio_min, sum.p_ratio_max);
                }
                ok = ok && pass;
            }
        d += "9 (N, s) pairs, 50 (x, t) samples each";
        return ok;
    });

    criterion(4, "large-r constants of D^k F_N", [](std::string& d) {
        double worst = 0.0;
        for (int N : {1, 2, 3})
            for (double s : {0.55, 0.75})
                for (int k : {0, 1, 2}) {
                    auto p = kp(N, s);
                    const double r = 200.0;
                    double scaled = std::pow(r, N + 2.0 * s + k) * d_f_radial(p, k, r);
                    worst = std::max(worst, rel(scaled, ell_limit(p, k)));
                }
        // Cauchy profile F_1 = sqrt(2 pi)/pi (1 + r^2)^{-1}: r^2 F_1 -> sqrt(2/pi)
        double cauchy = rel(ell_limit(kp(1, 0.5), 0), std::sqrt(2.0 / kPi));
        d = fmt("max rel gap at r = 200: %.2e; Cauchy limit rel %.1e", worst, cauchy);
        return worst <= 0.02 && cauchy <= 1e-12;
    });

    criterion(5, "derivative recursion", [](std::string& d) {
        // D F_N = -r F_{N+2}; unrolling twice and three times gives
        // D^2 F_N = -F_{N+2} + r^2 F_{N+4}, D^3 F_N = 3 r F_{N+4} - r^3 F_{N+6}
        auto a2 = alpha_coeffs(2), a3 = alpha_coeffs(3);
        bool tables = a2(1) == 1.0 && a2(2) == 1.0 && a3(2) == 3.0 && a3(3) == 1.0 && a3(1) == 0.0;
        double worst = 0.0;
        for (int N : {1, 2, 3})
            for (double s : {0.4, 0.75})
                for (double r : {0.5, 1.5, 4.0}) {
                    auto p = kp(N, s);
                    auto f = [&](double x) { return f_radial(p, x); };
                    for (int k : {1, 2, 3})
                        worst = std::max(worst, rel(d_f_radial(p, k, r), fd_derivative(f, k, r, k == 3 ? 0.01 : 0.02)));
                }
        d = std::string("coefficient tables ") + (tables ? "ok" : "wrong") +
            fmt("; max rel gap to finite differences %.2e", worst);
        return tables && worst <= 1e-4;
    });

    criterion(6, "cosine multiplier", [](std::string& d) {
        double worst = 0.0;
        for (double s : {0.3, 0.6, 0.9})
            for (double k : {0.5, 1.0, 2.0})
                for (int j = 0; j < 5; ++j) {
                    double x = -1.3 + 0.71 * j;
                    double v = frac_laplacian(FunctionSpec::cosine({k}), {x}, s).value;
                    worst = std::max(worst, std::abs(v - std::pow(k, 2 * s) * std::cos(k * x)));
                }
        d = fmt("max abs error %.2e over 45 evaluations", worst);
        return worst <= 1e-4;
    });

    criterion(7, "canonical solution", [](std::string& d) {
        double worst = 0.0;
        for (double s : {0.3, 0.6, 0.9}) {
            auto f = solve_canonical(FunctionSpec::cosine({1.0}), GridSpec::line(-5, 5, 21, {0.0, 0.5, 1.0, 2.0}), kp(1, s));
            for (size_t k = 0; k < f.values.size(); ++k)
                for (size_t i = 0; i < f.values[k].size(); ++i) {
                    double x = f.grid.node(i)[0];
                    worst = std::max(worst, std::abs(f.values[k][i] - std::exp(-f.grid.times[k]) * std::cos(x)));
                }
        }
        struct R {
            FunctionSpec u;
            KernelParams p;
            Point x;
            double t;
        };
        std::vector<R> battery{
            {FunctionSpec::cosine({1.0}), kp(1, 0.6), {0.4}, 0.7},
            {FunctionSpec::gaussian(1.0), kp(1, 0.7), {0.5}, 1.0},
            {FunctionSpec::abs_power(1.2), kp(1, 0.75), {1.0}, 1.0},
            {FunctionSpec::abs_power(0.4), kp(1, 0.3), {-0.7}, 0.5},
            {FunctionSpec::gaussian(1.0), kp(2, 0.6), {0.3, -0.4}, 0.8},
        };
        double res = 0.0;
        for (const auto& b : battery) res = std::max(res, std::abs(pde_residual(b.u, b.x, b.t, b.p)));
        d = fmt("cosine max error %.2e; max residual %.2e over 5 data", worst, res);
        return worst <= 1e-4 && res <= 1e-3;
    });

    criterion(8, "semigroup", [](std::string& d) {
        bool ok = true;
        double worst = 0.0;
        for (double s : {0.3, 0.5, 0.75}) {
            auto rep = semigroup_check(kp(1, s), 0.5, 0.7, 20.0, 81, 1e-5);
            ok = ok && rep.overall_pass();
            worst = std::max(worst, rep.checks.at(0).measured);
        }
        d = fmt("sup |p(.,0.5) * p(.,0.7) - p(.,1.2)| on [-20,20] = %.2e, s in {0.3,0.5,0.75}", worst);
        return ok && worst <= 1e-5;
    });

    criterion(9, "maximum principle", [](std::string& d) {
        bool ok = true;
        double excess = -1e300;
        for (const char* txt : {"cosine:1", "gaussian:1", "constant:2", "abs_power:-0.5", "gaussian:2@1"}) {
            auto u = FunctionSpec::parse(txt);
            auto f = solve_canonical(u, GridSpec::line(-4, 4, 17, {0.0, 0.25, 1.0, 4.0}), kp(1, 0.6));
            ok = ok && max_principle_check(f, u).overall_pass();
            excess = std::max(excess, f.max_value() - datum_range(u)->second);
        }
        d = fmt("max(sup u - sup u0) = %.2e over 5 data", excess);
        return ok && excess <= 1e-6;
    });

    criterion(10, "convexity preservation", [](std::string& d) {
        auto p = kp(1, 0.75);
        auto u = FunctionSpec::abs_power(1.2);
        auto f = solve_canonical(u, GridSpec::line(-5, 5, 21, {0.0, 0.5, 1.0, 2.0}), p);
        auto c = convexity_check(f, {{1.0}}, {0.5, 1.0, 2.0});
        std::vector<Point> pts;
        for (double x = -5; x <= 5; x += 1) pts.push_back({x});
        auto mono = monotonicity_check(u, pts, {0.1, 0.5, 1.0, 2.0}, p);
        double min_ut = mono.checks.at(0).measured;

        auto aff = FunctionSpec::affine(1.0, {0.5});
        auto fa = solve_canonical(aff, GridSpec::line(-5, 5, 21, {0.0, 1.0, 2.0}), p);
        double aff_err = 0.0;
        for (size_t k = 0; k < fa.values.size(); ++k)
            for (size_t i = 0; i < fa.values[k].size(); ++i)
                aff_err = std::max(aff_err, std::abs(fa.values[k][i] - aff.value(fa.grid.node(i))));

        GridSpec sq;
        sq.N = 2;
        sq.lo = {-1.0, -1.0};
        sq.hi = {1.0, 1.0};
        sq.counts = {3, 3};
        sq.times = {0.5, 2.0};
        auto fr = solve_canonical(FunctionSpec::ruled({1.0, 0.0}, FunctionSpec::abs_power(1.2)), sq, kp(2, 0.75));
        auto along = ruled_check(fr, {0.0, 1.0});
        auto across = ruled_check(fr, {1.0, 0.0});

        d = fmt("min second difference %.2e, min u_t %.2e, ", c.min_second_difference, min_ut) +
            fmt("affine error %.1e, ruling deviation %.1e along / %.2e across", aff_err, along.max_deviation,
                across.max_deviation);
        return c.convex && c.min_second_difference >= -1e-6 && mono.overall_pass() && min_ut >= 1e-4 &&
               aff_err <= 1e-6 && along.ruled && along.max_deviation <= 1e-6 && !across.ruled &&
               dichotomy_check(f).overall_pass() && dichotomy_check(fr).overall_pass();
    });

    criterion(11, "heat equation comparison", [](std::string& d) {
        ClassicalParams cp;
        auto f = solve_classical(FunctionSpec::quadratic(1.0), GridSpec::line(-3, 3, 13, {0.0, 0.1, 0.5, 1.0, 3.0}), cp);
        double worst = 0.0;
        for (size_t k = 0; k < f.values.size(); ++k)
            for (size_t i = 0; i < f.values[k].size(); ++i) {
                double x = f.grid.node(i)[0];
                worst = std::max(worst, std::abs(f.values[k][i] - (x * x + 2.0 * f.grid.times[k])));
            }
        ClassicalParams bounded;
        bounded.B = 1.0;  // T = 1/4
        bool below = std::abs(solve_classical_point(FunctionSpec::quadratic(1.0), {0.5}, 0.2, bounded).value - 0.65) < 1e-6;
        bool rejected = false;
        try {
            solve_classical_point(FunctionSpec::quadratic(1.0), {0.5}, 0.25, bounded);
        } catch (const DomainError&) {
            rejected = true;
        }
        d = fmt("max |u - (x^2 + 2t)| = %.2e; ", worst) + (rejected ? "t = T rejected" : "t = T accepted");
        return worst <= 1e-6 && below && rejected;
    });

    criterion(12, "definiteness classification", [](std::string& d) {
        struct Case {
            FunctionSpec u;
            double s;
            std::optional<Point> x;
            Definiteness expect;
        };
        const std::vector<Case> table{
            {FunctionSpec::affine(0.0, {1.0}), 0.4, std::nullopt, Definiteness::Indefinite},
            {FunctionSpec::affine(0.0, {1.0}), 0.7, std::nullopt, Definiteness::IdenticallyZero},
            {FunctionSpec::piecewise_linear_1d(-1.0), 0.4, Point{0.5}, Definiteness::NegInfinite},
            {FunctionSpec::piecewise_linear_1d(0.5), 0.4, Point{0.5}, Definiteness::Indefinite},
            {FunctionSpec::abs_power(1.2), 0.75, std::nullopt, Definiteness::ConvergesEverywhere},
            {FunctionSpec::constant(1.0), 0.3, std::nullopt, Definiteness::IdenticallyZero},
        };
        int hits = 0;
        for (const auto& c : table) hits += classify_definiteness(c.u, c.s, c.x).kind == c.expect;
        d = fmt("%g/6 cases match", hits);
        return hits == 6;
    });

    criterion(13, "vanishing at infinity", [](std::string& d) {
        // abs_power(beta) with s = 0.75; sigma = 2s - beta
        bool ok = true;
        for (double beta : {1.2, 0.75, 0.5}) {
            auto rep = vanish_at_infinity_check(FunctionSpec::abs_power(beta), 0.75, {1, 2, 5, 10, 20, 50, 100});
            ok = ok && rep.overall_pass();
            d += fmt("sigma=%.2f ratio %.3g; ", 1.5 - beta, rep.checks.back().measured);
        }
        auto neg = vanish_at_infinity_check(FunctionSpec::cosine({1.0}), 0.75, {1, 2, 5, 10, 20, 50, 100});
        d += std::string("cosine control ") + (neg.overall_pass() ? "passes (wrong)" : "fails");
        return ok && !neg.overall_pass();
    });

    return failures == 0 ? 0 : 1;
}
