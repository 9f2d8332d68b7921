#include <doctest.h>

#include <cmath>
#include <random>

#include "fracheat/kernel.hpp"

using namespace fracheat;

namespace {
KernelParams kp(int N, double s) {
    KernelParams p;
    p.N = N;
    p.s = s;
    return p;
}
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
const double kSqrt2Pi = std::sqrt(2.0 / M_PI);
}  // namespace

TEST_CASE("f_radial Cauchy closed form") {
    auto p = kp(1, 0.5);
    CHECK(rel(f_radial(p, 0.0), kSqrt2Pi) < 1e-14);
    CHECK(rel(f_radial(p, 1.0), kSqrt2Pi / 2.0) < 1e-12);
    for (double r : {0.05, 0.7, 2.0, 5.5, 17.0, 120.0, 900.0})
        CHECK(rel(f_radial(p, r), std::sqrt(2.0 * M_PI) / (M_PI * (1.0 + r * r))) < 1e-11);
}

TEST_CASE("f_radial against high-precision references") {
    // 40-digit quadrature of the defining Bessel integral
    struct Ref {
        int N;
        double s, r, v;
    } refs[] = {
        {1, 0.55, 0.1, 0.76419980106455966339}, {1, 0.55, 3.0, 0.080731049707778635221},
        {1, 0.55, 10.0, 0.0066837510830174562649}, {1, 0.999, 10.0, 5.7432232316857144689e-6},
        {2, 0.9, 10.0, 0.00011946526171436668781}, {3, 0.75, 3.0, 0.024518017306838508364},
        {3, 0.75, 30.0, 4.3598513846252643178e-7}, {7, 0.3, 1.0, 3.535963546650611143},
        {1, 0.3, 0.1, 1.0773167740203682173},
    };
    for (const auto& c : refs) {
        auto p = kp(c.N, c.s);
        CAPTURE(c.N);
        CAPTURE(c.s);
        CAPTURE(c.r);
        CHECK(rel(f_radial(p, c.r), c.v) < 1e-10);
        CHECK(rel(f_radial_subordination(p, c.r).value, c.v) < 1e-10);
    }
}

TEST_CASE("f_radial evaluation paths agree") {
    for (int N : {1, 2, 3})
        for (double s : {0.55, 0.8})
            for (double r : {0.5, 2.0, 6.0}) {
                auto p = kp(N, s);
                double a = f_radial_direct(p, r).value, b = f_radial_subordination(p, r).value;
                CHECK(rel(a, b) < 1e-10);
            }
    auto p = kp(2, 0.7);
    CHECK(rel(f_radial_small_series(p, 0.8).value, f_radial_direct(p, 0.8).value) < 1e-11);
    CHECK(rel(f_radial_asymptotic(p, 40.0).value, f_radial_subordination(p, 40.0).value) < 1e-11);
    CHECK(f_radial_detail(p, 0.0).method == RadialMethod::Origin);
}

TEST_CASE("f_radial N=3 s=0.75 against Fourier oracle") {
    auto p = kp(3, 0.75);
    double F = f_radial(p, 2.0);
    CHECK(F > 0.0);
    double oracle = heat_kernel_fourier(p, {2.0, 0.0, 0.0}, 1.0) * std::pow(2.0 * M_PI, 1.5);
    CHECK(rel(F, oracle) < 1e-6);
}

TEST_CASE("heat_kernel closed forms and scaling") {
    auto p = kp(1, 0.5);
    CHECK(rel(heat_kernel(p, {0.0}, 1.0), 1.0 / M_PI) < 1e-13);
    CHECK(rel(heat_kernel(p, {1.0}, 2.0), 2.0 / (5.0 * M_PI)) < 1e-12);
    CHECK_THROWS_AS(heat_kernel(p, {0.0}, 0.0), DomainError);
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> U(-3.0, 3.0), T(0.05, 4.0);
    for (int N : {1, 2, 3}) {
        auto q = kp(N, 0.65);
        for (int i = 0; i < 10; ++i) {
            Point x(N);
            for (auto& v : x) v = U(gen);
            double t = T(gen);
            Point y = x;
            for (auto& v : y) v *= std::pow(t, -1.0 / (2.0 * q.s));
            double lhs = heat_kernel(q, x, t), rhs = std::pow(t, -N / (2.0 * q.s)) * heat_kernel(q, y, 1.0);
            CHECK(lhs > 0.0);
            CHECK(rel(lhs, rhs) < 1e-10);
        }
    }
}

TEST_CASE("heat_kernel_fourier oracle") {
    CHECK(rel(heat_kernel_fourier(kp(1, 0.5), {0.0}, 1.0), 1.0 / M_PI) < 1e-12);
    auto p = kp(1, 0.7);
    for (double x : {0.0, 0.4, 1.3, 3.0, 8.0})
        for (double t : {0.2, 0.5, 1.0, 1.7, 3.0}) CHECK(rel(heat_kernel_fourier(p, {x}, t), heat_kernel(p, {x}, t)) < 1e-8);
    auto q = kp(2, 0.6);
    CHECK(rel(heat_kernel_fourier(q, {3.0, 4.0}, 2.0), heat_kernel(q, {3.0, 4.0}, 2.0)) < 1e-6);
}

TEST_CASE("alpha coefficient recursion") {
    auto a1 = alpha_coeffs(1);
    CHECK(a1(1) == 1.0);
    auto a2 = alpha_coeffs(2);
    CHECK(a2(1) == 1.0);
    CHECK(a2(2) == 1.0);
    auto a3 = alpha_coeffs(3);
    CHECK(a3(1) == 0.0);
    CHECK(a3(2) == 3.0);
    CHECK(a3(3) == 1.0);
    for (int k = 1; k <= 8; ++k) {
        auto a = alpha_coeffs(k);
        for (int j = 0; j <= k + 1; ++j) {
            bool inside = k <= 2 * j && j <= k;
            CHECK((a(j) > 0.0) == inside);
        }
    }
    CHECK_THROWS_AS(alpha_coeffs(0), DomainError);
}

TEST_CASE("d_f_radial") {
    auto p = kp(1, 0.5);
    CHECK(rel(d_f_radial(p, 1, 1.0), -kSqrt2Pi / 2.0) < 1e-11);
    CHECK(d_f_radial(p, 0, 1.3) == f_radial(p, 1.3));
    // D^3 of the Cauchy profile sqrt(2pi)/pi (1+r^2)^{-1}: 24 r (1 - r^2) / (1+r^2)^4
    double r = 0.6;
    CHECK(rel(d_f_radial(p, 3, r), std::sqrt(2.0 * M_PI) / M_PI * 24.0 * r * (1 - r * r) / std::pow(1 + r * r, 4)) < 1e-10);
    auto q = kp(2, 0.7);
    double h = 1e-3;
    double fd = (f_radial(q, 3.0 + h) - 2.0 * f_radial(q, 3.0) + f_radial(q, 3.0 - h)) / (h * h);
    CHECK(rel(d_f_radial(q, 2, 3.0), fd) < 1e-4);
    CHECK_THROWS_AS(d_f_radial(q, 5, 1.0), DomainError);
}

TEST_CASE("ell_limit") {
    auto p = kp(1, 0.5);
    CHECK(rel(ell_limit(p, 0), kSqrt2Pi) < 1e-14);
    CHECK(rel(ell_limit(p, 1), -2.0 * kSqrt2Pi) < 1e-14);
    for (int N : {1, 2, 3})
        for (double s : {0.1, 0.5, 0.9}) CHECK(ell_limit(kp(N, s), 0) > 0.0);
    // Cauchy: r^2 F_1(r) -> sqrt(2/pi)
    CHECK(rel(1e4 * 1e4 * f_radial(p, 1e4), kSqrt2Pi) < 1e-7);
}

TEST_CASE("kernel gradient") {
    auto p = kp(1, 0.5);
    CHECK(kernel_gradient(p, {0.0}, 1.0)[0] == 0.0);
    CHECK(rel(kernel_gradient(p, {1.0}, 1.0)[0], -1.0 / (2.0 * M_PI)) < 1e-11);
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> U(-2.0, 2.0), T(0.3, 2.0);
    for (int N : {1, 2, 3}) {
        auto q = kp(N, 0.7);
        for (int i = 0; i < 5; ++i) {
            Point x(N);
            for (auto& v : x) v = U(gen);
            double t = T(gen);
            auto g = kernel_gradient(q, x, t);
            for (int d = 0; d < N; ++d) {
                double h = 1e-4;
                Point a = x, b = x;
                a[d] += h;
                b[d] -= h;
                double fd = (heat_kernel(q, a, t) - heat_kernel(q, b, t)) / (2 * h);
                CHECK(std::abs(g[d] - fd) <= 1e-5 * std::max(std::abs(fd), 1e-3 * heat_kernel(q, x, t)));
            }
        }
    }
}

TEST_CASE("kernel time derivative") {
    auto p = kp(1, 0.5);
    CHECK(rel(kernel_time_derivative(p, {0.0}, 1.0), -1.0 / M_PI) < 1e-12);
    for (int N : {1, 2})
        for (double t : {0.4, 1.5}) {
            auto q = kp(N, 0.6);
            Point x(N, 0.8);
            double h = 1e-4 * t;
            double fd = (heat_kernel(q, x, t + h) - heat_kernel(q, x, t - h)) / (2 * h);
            CHECK(rel(kernel_time_derivative(q, x, t), fd) < 1e-5);
        }
    // mass conservation: d/dt of the unit mass vanishes
    auto q = kp(1, 0.75);
    double h = 1e-3;
    double dm = (kernel_mass(q, 1.0 + h).total - kernel_mass(q, 1.0 - h).total) / (2 * h);
    CHECK(std::abs(dm) < 1e-6);
}

TEST_CASE("kernel hessian matches finite differences") {
    auto q = kp(2, 0.8);
    Point x{0.7, -0.4};
    double t = 0.9, h = 1e-3;
    auto H = kernel_hessian(q, x, t);
    for (int i = 0; i < 2; ++i) {
        Point a = x, b = x;
        a[i] += h;
        b[i] -= h;
        auto ga = kernel_gradient(q, a, t), gb = kernel_gradient(q, b, t);
        for (int j = 0; j < 2; ++j) CHECK(std::abs(H[j * 2 + i] - (ga[j] - gb[j]) / (2 * h)) < 1e-6);
    }
}

TEST_CASE("kernel bounds report") {
    auto p = kp(1, 0.5);
    std::vector<std::pair<Point, double>> grid;
    for (double t : {0.1, 1.0, 10.0})
        for (double x : {0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0, 100.0}) grid.push_back({{x}, t});
    KernelBoundsSummary sum;
    auto rep = verify_kernel_bounds(p, grid, &sum);
    CHECK(rep.overall_pass());
    // Cauchy case: p/min{1/t, t/x^2} = g(x/t) with g in [1/(2 pi), 1/pi]
    CHECK(sum.p_ratio_min >= 1.0 / (2.0 * M_PI) - 1e-12);
    CHECK(sum.p_ratio_max <= 1.0 / M_PI + 1e-12);
    CHECK(rel(sum.p_ratio_max, 1.0 / M_PI) < 1e-12);
    CHECK(std::isfinite(sum.grad_ratio_max));
    auto q = kp(2, 0.75);
    auto r0 = verify_kernel_bounds(q, {{{0.0, 0.0}, 2.5}});
    CHECK(rel(r0.checks[0].measured, std::pow(2.0 * M_PI, -1.0) * f_radial(q, 0.0)) < 1e-13);
}

TEST_CASE("normalization") {
    for (int N : {1, 2, 3})
        for (double s : {0.55, 0.9}) {
            auto m = kernel_mass(kp(N, s), 0.7);
            CHECK(std::abs(m.total - 1.0) < 1e-9);
        }
}

TEST_CASE("second derivative of F_1 changes sign") {
    auto p = kp(1, 0.75);
    CHECK(d_f_radial(p, 2, 0.1) < 0.0);
    CHECK(d_f_radial(p, 2, 20.0) > 0.0);
    double a = 0.1, b = 20.0;
    for (int i = 0; i < 60; ++i) {
        double m = 0.5 * (a + b);
        (d_f_radial(p, 2, m) < 0.0 ? a : b) = m;
    }
    CHECK(std::abs(d_f_radial(p, 2, a)) < 1e-8);
}

TEST_CASE("radial profile table") {
    auto p = kp(2, 0.75);
    RadialProfileTable tab(p);
    CHECK(tab.interpolation_error() < 1e-9);
    CHECK(tab.interpolation_order() == 5);
    for (double r : {0.0, 5e-4, 0.02, 0.77, 3.3, 41.0, 999.0, 1001.0, 5e4}) {
        CHECK(rel(tab.f(r), f_radial(p, r)) < 1e-9);
        if (r > 0) CHECK(rel(tab.df(r), d_f_radial(p, 1, r)) < 1e-9);
    }
    double last = tab.nodes().back();
    CHECK(rel(tab.values().back() * std::pow(last, p.N + 2 * p.s), ell_limit(p, 0)) < 0.05);
    CHECK(rel(heat_kernel(tab, {0.3, 0.2}, 0.6), heat_kernel(p, {0.3, 0.2}, 0.6)) < 1e-9);
}
