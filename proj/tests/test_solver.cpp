#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdlib>

#include "fracheat/solver.hpp"

using namespace fracheat;

namespace {

KernelParams kp(int N, double s) {
    KernelParams p;
    p.N = N;
    p.s = s;
    return p;
}

// u(x,t) for u0 = exp(-x^2), N = 1, from the Fourier side:
// (1/sqrt(pi)) int_0^inf exp(-xi^2/4 - t xi^{2s}) cos(xi x) d xi
double gaussian_spectral(double x, double t, double s) {
    auto f = [&](double xi) { return std::exp(-0.25 * xi * xi - t * std::pow(xi, 2.0 * s)) * std::cos(xi * x); };
    double v = 0.0;
    for (int k = 0; k < 40; ++k)
        v += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.5 * k, 0.5 * (k + 1), 15, 1e-14);
    return v / std::sqrt(M_PI);
}

}  // namespace

TEST_CASE("grid spec") {
    GridSpec g;
    g.N = 2;
    g.lo = {0.0, -1.0};
    g.hi = {1.0, 1.0};
    g.counts = {3, 2};
    g.times = {0.0, 1.0};
    g.validate();
    CHECK(g.num_nodes() == 6);
    CHECK(g.node(1)[0] == doctest::Approx(0.5));
    CHECK(g.node(1)[1] == doctest::Approx(-1.0));
    CHECK(g.node(5)[1] == doctest::Approx(1.0));
    g.times = {1.0, 1.0};
    CHECK_THROWS_AS(g.validate(), DomainError);
    g.times = {-1.0};
    CHECK_THROWS_AS(g.validate(), DomainError);
    CHECK_THROWS_AS(GridSpec::line(0, 1, 1, {}), DomainError);
}

TEST_CASE("constant and affine data are reproduced") {
    for (double s : {0.3, 0.6, 0.9}) {
        auto p = kp(1, s);
        auto field = solve_canonical(FunctionSpec::constant(2.5), GridSpec::line(-5, 5, 11, {0.0, 0.5, 3.0}), p);
        for (const auto& row : field.values)
            for (double v : row) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
        CHECK(time_derivative(FunctionSpec::constant(2.5), {1.0}, 1.0, p) == 0.0);
    }
    auto p = kp(2, 0.75);
    auto a = FunctionSpec::affine(1.0, {2.0, -0.5});
    for (double t : {0.1, 1.0, 5.0}) {
        Point x{0.7, -1.3};
        CHECK(std::abs(solve_point(a, x, t, p).value - a.value(x)) < 1e-10);
    }
}

TEST_CASE("cosine datum decays with the multiplier") {
    for (int N : {1, 2, 3})
        for (double s : {0.3, 0.6, 0.9}) {
            auto p = kp(N, s);
            Point xi(N, 0.0), x(N, 0.2);
            xi[0] = 1.0;
            if (N > 1) xi[1] = 0.5;
            auto u = FunctionSpec::cosine(xi);
            double m = std::pow(norm(xi), 2.0 * s);
            for (double t : {0.1, 1.0, 3.0}) {
                PointValue v = solve_point(u, x, t, p);
                CHECK(std::abs(v.value - std::exp(-m * t) * u.value(x)) < 1e-8);
                CHECK(v.error_estimate < 1e-6);
            }
            CHECK(std::abs(time_derivative(u, x, 1.0, p) + m * std::exp(-m) * u.value(x)) < 1e-8);
        }
    CHECK(time_derivative(FunctionSpec::cosine({1.0}), {0.0}, 1.0, kp(1, 0.6)) ==
          doctest::Approx(-std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("gaussian against the Fourier integral") {
    for (double s : {0.3, 0.6, 0.9})
        for (double t : {0.1, 1.0})
            for (double x : {0.0, 0.5, 2.0, 7.0}) {
                double ref = gaussian_spectral(x, t, s);
                CHECK(std::abs(solve_point(FunctionSpec::gaussian(), {x}, t, kp(1, s)).value - ref) < 1e-9);
            }
}

TEST_CASE("time derivative matches a difference quotient") {
    auto p = kp(1, 0.75);
    auto u = FunctionSpec::abs_power(1.2);
    for (double x : {0.0, 1.0, 4.0}) {
        double t = 0.8, h = 1e-3;
        double fd = (solve_point(u, {x}, t + h, p).value - solve_point(u, {x}, t - h, p).value) / (2 * h);
        CHECK(time_derivative(u, {x}, t, p) == doctest::Approx(fd).epsilon(1e-5));
        CHECK(time_derivative(u, {x}, t, p) >= -1e-6);
    }
}

TEST_CASE("datum stored exactly at t = 0") {
    auto u = FunctionSpec::abs_power(1.2);
    auto field = solve_canonical(u, GridSpec::line(-3, 3, 7, {0.0, 1.0}), kp(1, 0.75));
    for (size_t i = 0; i < 7; ++i) CHECK(field.values[0][i] == u.value(field.grid.node(i)));
    CHECK(field.min_value() >= 1.0);
}

TEST_CASE("growth beyond 2s is rejected") {
    CHECK_THROWS_AS(solve_point(FunctionSpec::abs_power(1.6), {0.0}, 1.0, kp(1, 0.75)), DomainError);
    CHECK_THROWS_AS(solve_point(FunctionSpec::affine(0.0, {1.0}), {0.0}, 1.0, kp(1, 0.5)), DomainError);
    CHECK_THROWS_AS(solve_point(FunctionSpec::gaussian(), {0.0}, -1.0, kp(1, 0.5)), DomainError);
}

TEST_CASE("threaded solve is identical to serial") {
    auto u = FunctionSpec::gaussian();
    auto g = GridSpec::line(-4, 4, 17, {0.5, 1.0});
    auto a = solve_canonical(u, g, kp(1, 0.6), 1);
    auto b = solve_canonical(u, g, kp(1, 0.6), 4);
    CHECK(a.values == b.values);
    setenv("FRACHEAT_THREADS", "3", 1);
    CHECK(default_threads() == 3);
    setenv("FRACHEAT_THREADS", "zero", 1);
    CHECK(default_threads() == 1);
    unsetenv("FRACHEAT_THREADS");
}

TEST_CASE("linearity and comparison") {
    auto p = kp(1, 0.6);
    auto g = FunctionSpec::gaussian(), c = FunctionSpec::cosine({1.0});
    for (double x : {0.0, 1.5}) {
        double ug = solve_point(g, {x}, 0.7, p).value, uc = solve_point(c, {x}, 0.7, p).value;
        double u2 = solve_point(FunctionSpec::gaussian(2.0), {x}, 0.7, p).value;
        CHECK(ug >= u2 - 1e-12);  // exp(-x^2) >= exp(-2x^2)
        CHECK(uc + 2.0 * ug == doctest::Approx(std::exp(-0.7) * std::cos(x) + 2.0 * gaussian_spectral(x, 0.7, 0.6)));
    }
}

TEST_CASE("pde residual") {
    struct Case {
        FunctionSpec u;
        int N;
        double s;
        Point x;
        double t;
    };
    std::vector<Case> cases{
        {FunctionSpec::cosine({1.0}), 1, 0.6, {0.3}, 0.5},
        {FunctionSpec::gaussian(), 1, 0.7, {0.5}, 1.0},
        {FunctionSpec::abs_power(1.2), 1, 0.75, {0.5}, 1.0},
        {FunctionSpec::abs_power(0.4), 1, 0.3, {2.0}, 0.5},
        {FunctionSpec::gaussian(), 2, 0.6, {0.3, 0.4}, 0.5},
    };
    for (const auto& c : cases) {
        auto r = pde_residual_detail(c.u, c.x, c.t, kp(c.N, c.s));
        CHECK_MESSAGE(std::abs(r.residual) < 1e-3, c.u.to_string());
        CHECK(std::abs(r.u_t) > 1e-3);
    }
    CHECK(pde_residual(FunctionSpec::constant(1.0), {0.0}, 1.0, kp(1, 0.5)) == 0.0);
}

TEST_CASE("envelope propagation") {
    auto tr = envelope_propagate(FunctionSpec::abs_power(1.2), kp(1, 0.75), {0.1, 0.5, 1, 2, 5, 10});
    CHECK(tr.report.overall_pass());
    CHECK(tr.exponent_bound == doctest::Approx(0.8));
    CHECK(tr.fitted_exponent <= 0.9);
    auto b = envelope_propagate(FunctionSpec::gaussian(), kp(1, 0.75), {0.1, 1, 10});
    CHECK(b.report.overall_pass());
    auto c = envelope_propagate(FunctionSpec::cosine({1.0}), kp(1, 0.75), {0.1, 1, 2});
    CHECK(c.A[0] > c.A[1]);
    CHECK(c.A[1] > c.A[2]);
}

TEST_CASE("initial continuity") {
    CHECK(initial_continuity_check(FunctionSpec::cosine({1.0}), {0.0}, kp(1, 0.6)).overall_pass());
    CHECK(initial_continuity_check(FunctionSpec::abs_power(1.2), {2.0}, kp(1, 0.75)).overall_pass());
    auto rep = initial_continuity_check(FunctionSpec::constant(3.0), {0.0}, kp(1, 0.4));
    for (const auto& c : rep.checks)
        if (c.name.rfind("gap", 0) == 0) CHECK(c.measured == 0.0);
}

TEST_CASE("semigroup of the kernel") {
    for (double s : {0.3, 0.5, 0.75}) CHECK(semigroup_check(kp(1, s), 0.5, 0.7).overall_pass());
}

TEST_CASE("classical heat equation") {
    ClassicalParams cp;
    for (double x : {-2.0, 0.0, 0.5, 3.0})
        for (double t : {0.01, 0.3, 2.0}) {
            CHECK(std::abs(solve_classical_point(FunctionSpec::quadratic(1.0), {x}, t, cp).value - (x * x + 2 * t)) < 1e-6);
            CHECK(std::abs(solve_classical_point(FunctionSpec::cosine({1.0}), {x}, t, cp).value -
                           std::exp(-t) * std::cos(x)) < 1e-6);
        }
    auto a = FunctionSpec::affine(1.0, {0.5});
    CHECK(solve_classical_point(a, {1.0}, 1.0, cp).value == doctest::Approx(1.5).epsilon(1e-12));
    cp.B = 0.5;
    CHECK(cp.max_time() == doctest::Approx(0.5));
    CHECK_NOTHROW(solve_classical(FunctionSpec::quadratic(1.0), GridSpec::line(-1, 1, 3, {0.1, 0.4}), cp));
    CHECK_THROWS_AS(solve_classical(FunctionSpec::quadratic(1.0), GridSpec::line(-1, 1, 3, {0.1, 0.5}), cp), DomainError);
}

TEST_CASE("s close to 1 approaches the classical solution") {
    ClassicalParams cp;
    auto p = kp(1, 0.999);
    for (const auto& u : {FunctionSpec::cosine({1.0}), FunctionSpec::gaussian()})
        for (double t : {0.1, 0.5, 1.0})
            for (double x : {0.0, 1.0}) {
                double f = solve_point(u, {x}, t, p).value, c = solve_classical_point(u, {x}, t, cp).value;
                CHECK(std::abs(f - c) <= 0.02 * std::abs(c));
            }
}
