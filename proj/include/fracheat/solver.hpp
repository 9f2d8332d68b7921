#pragma once

#include <functional>
#include <vector>

#include "fracheat/fraclap.hpp"
#include "fracheat/kernel.hpp"

namespace fracheat {

struct GridSpec {
    int N = 1;
    Point lo, hi;             // bounding box
    std::vector<int> counts;  // nodes per axis, >= 2
    std::vector<double> times;

    void validate() const;
    size_t num_nodes() const;
    // axis 0 varies fastest
    Point node(size_t index) const;

    // single-axis helper: N = 1, [a, b] with n nodes
    static GridSpec line(double a, double b, int n, std::vector<double> times);
};

struct SolutionField {
    GridSpec grid;
    // values[k][i]: time grid.times[k], node i
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> errors;
    FunctionSpec datum = FunctionSpec::constant(0.0);

    double at(size_t time_index, size_t node) const { return values[time_index][node]; }
    double max_value() const;
    double min_value() const;
};

// worker count: FRACHEAT_THREADS if set and positive, else 1
int default_threads();

// fn(i) for i in [0, n) on `threads` workers; the first exception is rethrown
void parallel_for(size_t n, const std::function<void(size_t)>& fn, int threads = 0);

struct PointValue {
    double value = 0.0;
    double error_estimate = 0.0;
};

// u(x,t) = int u0(x - y) p(y,t) dy.  With y = t^{1/2s} rho omega this is
// u0(x) + (2 pi)^{-N/2} int rho^{N-1} F_N(rho) [M(rho) - |S| u0(x)] d rho,
// M the spherical integral of u0 over the sphere of radius t^{1/2s} rho;
// subtracting u0(x) uses the unit mass of p and keeps constants exact.
PointValue solve_point(const FunctionSpec& u0, const Point& x, double t, const KernelParams& params);

SolutionField solve_canonical(const FunctionSpec& u0, const GridSpec& grid, const KernelParams& params,
                              int threads = 0);

// u_t(x,t) = int u0(x - y) p_t(y,t) dy with
// p_t dy = -(2 pi)^{-N/2} / (2 s t) [N F_N(rho) - rho^2 F_{N+2}(rho)] dz
PointValue time_derivative_detail(const FunctionSpec& u0, const Point& x, double t, const KernelParams& params);
double time_derivative(const FunctionSpec& u0, const Point& x, double t, const KernelParams& params);

struct ResidualResult {
    double residual = 0.0;
    double u_t = 0.0;
    double frac_lap = 0.0;
    double error_estimate = 0.0;
    double stencil_step = 0.0;
};

// u_t + (-Delta)^s u(., t) at x.  The fractional Laplacian sees the computed
// solution: near x through a least-squares quintic fit on a 7-point stencil
// per direction, farther out through direct evaluations of u(., t).
ResidualResult pde_residual_detail(const FunctionSpec& u0, const Point& x, double t, const KernelParams& params);
double pde_residual(const FunctionSpec& u0, const Point& x, double t, const KernelParams& params);

struct EnvelopeTrace {
    std::vector<double> times;
    std::vector<double> A;  // measured A(t)
    double B = 0.0;
    double fitted_exponent = 0.0;  // slope of log A against log t over the sampled times
    double exponent_bound = 0.0;   // 1 - sigma/(2s)
    VerificationReport report;
};

// Measures A(t) = max |u(x,t)| - B |x|^{2s-sigma} over sample points with
// B = 4 c B0 (c from (a+b)^beta <= c (a^beta + b^beta)).
EnvelopeTrace envelope_propagate(const FunctionSpec& u0, const KernelParams& params, const std::vector<double>& times,
                                 int threads = 0);

// |u(x_n, t_n) - u0(x0)| along x_n = x0 + 2^{-n} e_1, t_n = 4^{-n}, n = 1..n_max
VerificationReport initial_continuity_check(const FunctionSpec& u0, const Point& x0, const KernelParams& params,
                                            int n_max = 10, double tolerance = 1e-2);

// N = 1: sup over x in [-half_width, half_width] of
// |int p(y,t1) p(x-y,t2) dy - p(x,t1+t2)|, the convolution integral taken
// adaptively over the whole line (algebraic tails mapped onto (0,1]).
VerificationReport semigroup_check(const KernelParams& params, double t1, double t2, double half_width = 20.0,
                                   int samples = 81, double tolerance = 1e-5, int threads = 0);

struct ClassicalParams {
    int N = 1;
    // |u0(x)| <= A exp(B |x|^2); existence up to T = 1/(4B); B = 0 means no limit
    double B = 0.0;
    QuadratureConfig quad{};

    double max_time() const;
};

// s = 1: convolution with (4 pi t)^{-N/2} exp(-|x|^2 / 4t)
PointValue solve_classical_point(const FunctionSpec& u0, const Point& x, double t, const ClassicalParams& params);
// u_t = pi^{-N/2} / t int rho^{N-1} exp(-rho^2) (rho^2 - N/2) [M(rho) - |S| u0(x)] d rho
PointValue classical_time_derivative(const FunctionSpec& u0, const Point& x, double t, const ClassicalParams& params);
SolutionField solve_classical(const FunctionSpec& u0, const GridSpec& grid, const ClassicalParams& params,
                              int threads = 0);

}  // namespace fracheat
