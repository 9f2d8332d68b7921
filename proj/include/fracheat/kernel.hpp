#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "fracheat/report.hpp"
#include "fracheat/specfun.hpp"

namespace fracheat {

using Point = std::vector<double>;

double norm(const Point& x);

struct KernelParams {
    int N = 1;
    double s = 0.5;
    QuadratureConfig quad{};

    void validate() const;
    KernelParams shifted(int dN) const {
        KernelParams p = *this;
        p.N += dN;
        return p;
    }
};

enum class RadialMethod { Origin, SmallSeries, Direct, Subordination, Asymptotic };

const char* to_string(RadialMethod m);

struct RadialValue {
    double value = 0.0;
    double error_estimate = 0.0;
    RadialMethod method = RadialMethod::Origin;
};

// F_N(r) = r^{(2-N)/2} int_0^inf exp(-rho^{2s}) rho^{N/2} J_{(N-2)/2}(r rho) drho.
// The evaluator picks between the small-r power series, direct Bessel
// quadrature, a subordination integral with positive integrand and the
// large-r expansion, whichever certifies the requested accuracy.
RadialValue f_radial_detail(const KernelParams& params, double r);
double f_radial(const KernelParams& params, double r);

// individual paths, exposed for cross-checking
RadialValue f_radial_direct(const KernelParams& params, double r);
RadialValue f_radial_subordination(const KernelParams& params, double r);
RadialValue f_radial_small_series(const KernelParams& params, double r);
RadialValue f_radial_asymptotic(const KernelParams& params, double r);
double f_radial_origin(int N, double s);

double heat_kernel(const KernelParams& params, const Point& x, double t);

// Slow oracle: (2 pi)^{-N} int exp(i x.xi - t |xi|^{2s}) dxi reduced to one
// radial integral in xi and integrated on its own panel grid.
double heat_kernel_fourier(const KernelParams& params, const Point& x, double t);

struct AlphaTable {
    int k = 1;
    // coefficient alpha_{j,k} stored at index j, zero outside k <= 2j <= 2k
    std::vector<double> alpha;

    double operator()(int j) const { return j >= 0 && j < static_cast<int>(alpha.size()) ? alpha[j] : 0.0; }
    int j_min() const { return (k + 1) / 2; }
    int j_max() const { return k; }
};

AlphaTable alpha_coeffs(int k);

constexpr int kMaxDerivative = 4;

double d_f_radial(const KernelParams& params, int k, double r);

double ell_limit(const KernelParams& params, int k);

std::vector<double> kernel_gradient(const KernelParams& params, const Point& x, double t);

double kernel_time_derivative(const KernelParams& params, const Point& x, double t);

// D^alpha p for |alpha| = 2 as a row-major N x N Hessian
std::vector<double> kernel_hessian(const KernelParams& params, const Point& x, double t);

struct KernelBoundsSummary {
    double p_ratio_min = 0.0, p_ratio_max = 0.0;
    double grad_ratio_max = 0.0, hess_ratio_max = 0.0, pt_ratio_max = 0.0;
};

VerificationReport verify_kernel_bounds(const KernelParams& params,
                                        const std::vector<std::pair<Point, double>>& grid,
                                        KernelBoundsSummary* summary = nullptr);

// Tabulated F_N and F_{N+2} on log-spaced nodes with quintic Hermite
// interpolation in (log r, log F).  First and second derivatives come from
// DF_N = -r F_{N+2}, so each node stores F_N .. F_{N+6}.
// Below the first node the small-r path is used, beyond the last node a
// fixed number of large-r expansion terms.
class RadialProfileTable {
public:
    RadialProfileTable(const KernelParams& params, double r_min = 1e-3, double r_max = 1e3,
                       int nodes_per_decade = 48);

    const KernelParams& params() const { return params_; }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& values() const { return f0_; }
    int interpolation_order() const { return 5; }
    double r_max() const { return nodes_.back(); }

    double f(double r) const { return eval(0, r); }
    // F_{N+2}(r)
    double f2(double r) const { return eval(1, r); }
    // D F_N(r) = -r F_{N+2}(r)
    double df(double r) const { return -r * f2(r); }

    // largest relative gap between interpolation and direct evaluation at
    // the midpoints, measured once during construction
    double interpolation_error() const { return interp_err_; }

private:
    double eval(int which, double r) const;
    double tail(int which, double r) const;

    KernelParams params_;
    std::vector<double> nodes_;  // first entry 0
    std::vector<double> logr_;
    std::vector<double> f0_;
    std::vector<double> lf0_, lf2_, slope0_, slope2_, curv0_, curv2_;
    double origin0_ = 0.0, origin2_ = 0.0;
    // large-r expansion: value = sum_k coef[k] r^{-N-2sk}
    std::vector<double> tail0_, tail2_;
    double interp_err_ = 0.0;
};

std::shared_ptr<const RadialProfileTable> shared_profile_table(const KernelParams& params);

// p(x,t) from a prebuilt profile table
double heat_kernel(const RadialProfileTable& table, const Point& x, double t);

struct MassResult {
    double numeric = 0.0;  // int over |x| <= R
    double tail = 0.0;     // |x| > R from the large-r expansion, integrated termwise
    double total = 0.0;
    double error_estimate = 0.0;
    double radius = 0.0;
};

// int_{R^N} p(x,t) dx; R = radius * t^{1/2s}
MassResult kernel_mass(const KernelParams& params, double t, double radius = 40.0);

}  // namespace fracheat
