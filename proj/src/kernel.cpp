#include "fracheat/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>

namespace fracheat {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();

double target_rel(const KernelParams& p) { return std::clamp(p.quad.rel_tol * 1e-3, 1e-12, 1e-6); }

// J_nu(z) with nu = n + 1/2 through the spherical functions, otherwise boost
double bessel_fast(double nu, double z) {
    double twice = 2.0 * nu;
    if (twice == std::floor(twice) && static_cast<long>(twice) % 2 != 0) {
        if (z == 0.0) return nu > 0 ? 0.0 : std::numeric_limits<double>::infinity();
        int n = static_cast<int>(std::floor(nu));
        if (n < 0) return std::sqrt(2.0 / (M_PI * z)) * std::cos(z);
        return std::sqrt(2.0 * z / M_PI) * boost::math::sph_bessel(static_cast<unsigned>(n), z);
    }
    return bessel_j(nu, z);
}
}  // namespace

double norm(const Point& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

void KernelParams::validate() const {
    if (N < 1) throw DomainError("kernel: dimension N must be >= 1");
    if (!(s > 0.0 && s < 1.0)) throw DomainError("kernel: s must lie in (0,1)");
    quad.validate();
}

const char* to_string(RadialMethod m) {
    switch (m) {
        case RadialMethod::Origin: return "origin";
        case RadialMethod::SmallSeries: return "small-series";
        case RadialMethod::Direct: return "direct";
        case RadialMethod::Subordination: return "subordination";
        case RadialMethod::Asymptotic: return "asymptotic";
    }
    return "?";
}

double f_radial_origin(int N, double s) {
    // J_nu(z) ~ (z/2)^nu / Gamma(nu+1) removes the r^{(2-N)/2} singularity
    double lg = std::lgamma(N / (2.0 * s)) - std::lgamma(N / 2.0) + 0.5 * (2.0 - N) * std::log(2.0);
    return std::exp(lg) / (2.0 * s);
}

RadialValue f_radial_small_series(const KernelParams& params, double r) {
    const int N = params.N;
    const double s = params.s;
    RadialValue out{0.0, std::numeric_limits<double>::infinity(), RadialMethod::SmallSeries};
    if (r == 0.0) {
        out.value = f_radial_origin(N, s);
        out.error_estimate = kEps * out.value;
        return out;
    }
    const double lr = 2.0 * std::log(r / 2.0);
    double sum = 0.0, sum_abs = 0.0, prev = std::numeric_limits<double>::infinity();
    for (int m = 0; m < 2000; ++m) {
        double L = m * lr + std::lgamma((N + 2.0 * m) / (2.0 * s)) - std::lgamma(m + 1.0) - std::lgamma(m + N / 2.0);
        double mag = std::exp(L);
        // for s > 1/2 the series is entire and eventually decreases
        if (s <= 0.5 && m > 2 && L > prev) {
            out.error_estimate = std::exp(prev);
            break;
        }
        if (m > 2 && mag < 1e-18 * std::abs(sum)) {
            out.error_estimate = mag;
            break;
        }
        sum += (m % 2 ? -mag : mag);
        sum_abs += mag;
        prev = L;
    }
    double pref = std::exp(0.5 * (2.0 - N) * std::log(2.0)) / (2.0 * s);
    out.value = pref * sum;
    out.error_estimate = pref * (out.error_estimate + 4.0 * kEps * sum_abs);
    return out;
}

RadialValue f_radial_asymptotic(const KernelParams& params, double r) {
    const int N = params.N;
    const double s = params.s;
    RadialValue out{0.0, std::numeric_limits<double>::infinity(), RadialMethod::Asymptotic};
    if (!(r > 0.0)) return out;
    const double lr = std::log(r), l2 = std::log(2.0);
    double sum = 0.0, sum_abs = 0.0, prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 4000; ++k) {
        double M = (N / 2.0 + 2.0 * s * k) * l2 + std::lgamma((N + 2.0 * s * k) / 2.0) + std::lgamma(1.0 + s * k) -
                   std::lgamma(k + 1.0) - (N + 2.0 * s * k) * lr;
        double mag = std::exp(M) / M_PI;
        // only asymptotic for s >= 1/2: stop at the smallest term
        if (s >= 0.5 && k > 1 && M > prev) {
            out.error_estimate = std::exp(prev) / M_PI;
            break;
        }
        if (k > 1 && mag < 1e-18 * std::abs(sum)) {
            out.error_estimate = mag;
            break;
        }
        double term = mag * std::sin(M_PI * s * k);
        sum += (k % 2 ? term : -term);
        sum_abs += std::abs(term);
        prev = M;
    }
    out.value = sum;
    out.error_estimate += 4.0 * kEps * sum_abs;
    return out;
}

RadialValue f_radial_direct(const KernelParams& params, double r) {
    const int N = params.N;
    const double s = params.s;
    RadialValue out{0.0, 0.0, RadialMethod::Direct};
    if (r == 0.0) {
        out.value = f_radial_origin(N, s);
        out.method = RadialMethod::Origin;
        return out;
    }
    const double nu = 0.5 * (N - 2.0);
    const double tol = target_rel(params);
    // magnitude guess fixes absolute thresholds for the truncation
    double guess = std::min(f_radial_origin(N, s), ell_limit(params, 0) * std::pow(r, -N - 2.0 * s));
    double scale = guess * std::pow(r, nu);
    DecayEnvelope env{2.0 * s, N / 2.0};
    double rmax = 1.25 * truncation_radius(env, 1e-3 * tol * scale);
    std::vector<double> br{0.0};
    double step = std::min(M_PI / r, 1.0);
    // early panels shrink geometrically towards 0 where rho^{2s} is not smooth
    for (double x = step / 64.0; x < step; x *= 2.0) br.push_back(x);
    for (double x = step; x < rmax; x += step) br.push_back(x);
    br.push_back(rmax);
    QuadratureConfig q = params.quad;
    q.rel_tol = tol;
    q.abs_tol = 1e-2 * tol * scale;
    q.max_subdivisions = std::max<int>(params.quad.max_subdivisions, 8 * static_cast<int>(br.size()));
    auto f = [&](double rho) {
        return std::exp(-std::pow(rho, 2.0 * s)) * std::pow(rho, 0.5 * N) * bessel_fast(nu, r * rho);
    };
    IntegralResult res;
    try {
        res = integrate_adaptive(f, br, q);
    } catch (const ConvergenceError& e) {
        res = e.best();
    }
    double pref = std::pow(r, -nu);
    out.value = pref * res.value;
    // function values carry about 1e-15 relative noise which cancellation amplifies
    out.error_estimate = pref * (res.error_estimate + 4e-15 * res.abs_value);
    return out;
}

namespace {

// log a(phi) in terms of theta = pi - phi, Kanter's function for the
// one-sided s-stable law
double log_kanter(double s, double theta) {
    double phi = M_PI - theta;
    double sin_phi = theta < M_PI / 2 ? std::sin(theta) : std::sin(phi);
    double sin_s = std::sin(s * phi);
    double sin_1s = std::sin((1.0 - s) * phi);
    if (phi < 1e-6) {
        // a(phi) -> s^{s/(1-s)} (1 - s) as phi -> 0
        return (s / (1.0 - s)) * std::log(s) + std::log1p(-s);
    }
    return (std::log(sin_s) - std::log(sin_phi)) / (1.0 - s) + std::log(sin_1s) - std::log(sin_s);
}

// log of int_0^inf exp(-e) (e/a)^{cN/2} exp(-(r^2/4)(e/a)^c) de with c = (1-s)/s
double log_inner(double c, int N, double lambda, double log_r2_4, int* evals) {
    const double p = 1.0 + c * N / 2.0;
    if (!std::isfinite(log_r2_4)) return std::lgamma(p) - c * N / 2.0 * lambda;
    const double logK = log_r2_4 - c * lambda;
    auto L = [&](double v) { return p * v - std::exp(v) - c * N / 2.0 * lambda - std::exp(logK + c * v); };
    auto dL = [&](double v) { return p - std::exp(v) - c * std::exp(logK + c * v); };
    double hi = std::min(std::log(p), (std::log(p / c) - logK) / c);
    double lo = std::min(std::log(p / 2.0), (std::log(p / (2.0 * c)) - logK) / c);
    for (int i = 0; i < 200 && hi - lo > 1e-10 * (1.0 + std::abs(hi)); ++i) {
        double m = 0.5 * (lo + hi);
        (dL(m) > 0 ? lo : hi) = m;
    }
    const double vs = 0.5 * (lo + hi);
    const double Ls = L(vs);
    const double curv = std::exp(vs) + c * c * std::exp(logK + c * vs);
    const double sig = 1.0 / std::sqrt(curv);
    const double step = std::max(sig, 0.05);
    double vl = vs, vr = vs;
    while (L(vl) > Ls - 46.0) vl -= step;
    while (L(vr) > Ls - 46.0) vr += step;
    std::vector<double> br;
    for (double v = vl; v < vr; v += 2.0 * step) br.push_back(v);
    br.push_back(vr);
    QuadratureConfig q;
    q.rel_tol = 1e-13;
    q.abs_tol = 1e-20;
    q.max_subdivisions = 400;
    IntegralResult res;
    try {
        res = integrate_adaptive([&](double v) { return std::exp(L(v) - Ls); }, br, q);
    } catch (const ConvergenceError& e) {
        res = e.best();
    }
    if (evals) *evals += static_cast<int>(res.evaluations);
    return Ls + std::log(res.value);
}

}  // namespace

RadialValue f_radial_subordination(const KernelParams& params, double r) {
    const int N = params.N;
    const double s = params.s;
    RadialValue out{0.0, 0.0, RadialMethod::Subordination};
    const double c = (1.0 - s) / s;
    const double log_r2_4 = r > 0.0 ? 2.0 * std::log(r / 2.0) : -std::numeric_limits<double>::infinity();
    int evals = 0;
    // outer variable w = log(pi - phi)
    auto logF = [&](double w) { return w + log_inner(c, N, log_kanter(s, std::exp(w)), log_r2_4, &evals); };
    const double wmax = std::log(M_PI);
    double wmin = -2.0 * s * std::log(std::max(r, 1.0)) - 60.0 / (1.0 + N / (2.0 * s)) - 10.0;
    // locate the peak on a coarse scan and trim the range
    const int scan = 96;
    double peak = -std::numeric_limits<double>::infinity();
    std::vector<double> ws(scan), ls(scan);
    for (int i = 0; i < scan; ++i) {
        ws[i] = wmin + (wmax - wmin) * (i + 0.5) / scan;
        ls[i] = logF(ws[i]);
        peak = std::max(peak, ls[i]);
    }
    int first = 0;
    while (first < scan - 1 && ls[first] < peak - 50.0) ++first;
    double lo = first > 0 ? ws[first - 1] : wmin;
    std::vector<double> br;
    for (double w = lo; w < wmax; w += 0.5) br.push_back(w);
    br.push_back(wmax);
    QuadratureConfig q;
    q.rel_tol = target_rel(params);
    q.abs_tol = 1e-22;
    q.max_subdivisions = 1000;
    IntegralResult res;
    try {
        res = integrate_adaptive([&](double w) { return std::exp(logF(w) - peak); }, br, q);
    } catch (const ConvergenceError& e) {
        res = e.best();
        res.error_estimate = std::max(res.error_estimate, std::abs(res.value));
    }
    double pref = std::exp(-0.5 * N * std::log(2.0) + peak) / M_PI;
    out.value = pref * res.value;
    out.error_estimate = pref * res.error_estimate + 1e-14 * out.value;
    return out;
}

RadialValue f_radial_detail(const KernelParams& params, double r) {
    params.validate();
    if (!(r >= 0.0)) throw DomainError("f_radial: r must be non-negative");
    const double tol = target_rel(params);
    auto good = [&](const RadialValue& v) {
        return std::isfinite(v.value) && v.value > 0.0 && v.error_estimate <= tol * v.value;
    };
    if (r == 0.0) {
        double v = f_radial_origin(params.N, params.s);
        return {v, kEps * v, RadialMethod::Origin};
    }
    if (r < 4.0) {
        RadialValue v = f_radial_small_series(params, r);
        if (good(v)) return v;
    }
    if (r > 1.0) {
        RadialValue v = f_radial_asymptotic(params, r);
        if (good(v)) return v;
    }
    if (r * std::pow(std::max(1.0, 40.0), 1.0 / (2.0 * params.s)) < 4e5) {
        RadialValue v = f_radial_direct(params, r);
        if (good(v)) return v;
    }
    RadialValue v = f_radial_subordination(params, r);
    if (!(std::isfinite(v.value) && v.value > 0.0))
        throw ConvergenceError("f_radial: no evaluation path converged", IntegralResult{v.value, v.error_estimate, 0, 0});
    return v;
}

double f_radial(const KernelParams& params, double r) { return f_radial_detail(params, r).value; }

double heat_kernel(const KernelParams& params, const Point& x, double t) {
    params.validate();
    if (!(t > 0.0)) throw DomainError("heat_kernel: t must be positive");
    if (static_cast<int>(x.size()) != params.N) throw DomainError("heat_kernel: point dimension mismatch");
    const double s = params.s;
    const int N = params.N;
    double r = norm(x) * std::pow(t, -1.0 / (2.0 * s));
    return std::pow(t, -N / (2.0 * s)) * std::pow(2.0 * M_PI, -N / 2.0) * f_radial(params, r);
}

double heat_kernel_fourier(const KernelParams& params, const Point& x, double t) {
    params.validate();
    if (!(t > 0.0)) throw DomainError("heat_kernel_fourier: t must be positive");
    const int N = params.N;
    const double s = params.s;
    const double R = norm(x);
    using boost::math::quadrature::gauss;
    // e^{-t xi^{2s}} below 1e-35 beyond xi_max
    const double xi_max = std::pow(80.0 / t, 1.0 / (2.0 * s));
    std::function<double(double)> g;
    double pref;
    if (R == 0.0) {
        double area = 2.0 * std::pow(M_PI, N / 2.0) / std::tgamma(N / 2.0);
        pref = area * std::pow(2.0 * M_PI, -N);
        g = [=](double xi) { return std::pow(xi, N - 1) * std::exp(-t * std::pow(xi, 2.0 * s)); };
    } else if (N == 1) {
        pref = 1.0 / M_PI;
        g = [=](double xi) { return std::cos(R * xi) * std::exp(-t * std::pow(xi, 2.0 * s)); };
    } else if (N == 3) {
        pref = 1.0 / (2.0 * M_PI * M_PI * R);
        g = [=](double xi) { return xi * std::sin(R * xi) * std::exp(-t * std::pow(xi, 2.0 * s)); };
    } else {
        const double nu = 0.5 * (N - 2.0);
        pref = std::pow(2.0 * M_PI, -N / 2.0) * std::pow(R, -nu);
        g = [=](double xi) {
            return std::pow(xi, N / 2.0) * bessel_j(nu, R * xi) * std::exp(-t * std::pow(xi, 2.0 * s));
        };
    }
    // fixed 30-point Gauss panels, half an oscillation wide, graded towards 0
    double width = R > 0.0 ? std::min(M_PI / R, xi_max / 64.0) : xi_max / 256.0;
    double sum = 0.0;
    double a = 0.0;
    for (double b = width * std::pow(2.0, -30); b < width; b *= 2.0) {
        sum += gauss<double, 30>::integrate(g, a, b);
        a = b;
    }
    for (double b = width; a < xi_max; b += width) {
        sum += gauss<double, 30>::integrate(g, a, b);
        a = b;
    }
    return pref * sum;
}

AlphaTable alpha_coeffs(int k) {
    if (k < 1) throw DomainError("alpha_coeffs: k must be >= 1");
    AlphaTable t;
    t.k = 1;
    t.alpha = {0.0, 1.0};
    for (int kk = 1; kk < k; ++kk) {
        std::vector<double> next(kk + 2, 0.0);
        for (int j = 0; j <= kk + 1; ++j) {
            if (!(kk + 1 <= 2 * j && j <= kk + 1)) continue;
            double a_jk = j <= kk ? t.alpha[j] : 0.0;
            double a_j1k = j - 1 >= 0 && j - 1 <= kk ? t.alpha[j - 1] : 0.0;
            next[j] = (2.0 * j - kk) * a_jk + a_j1k;
        }
        t.alpha = std::move(next);
        t.k = kk + 1;
    }
    return t;
}

double d_f_radial(const KernelParams& params, int k, double r) {
    if (k < 0 || k > kMaxDerivative) throw DomainError("d_f_radial: order must lie in [0, 4]");
    if (k == 0) return f_radial(params, r);
    if (!(r > 0.0)) throw DomainError("d_f_radial: r must be positive");
    AlphaTable a = alpha_coeffs(k);
    double sum = 0.0;
    for (int j = a.j_min(); j <= a.j_max(); ++j) {
        double term = a(j) * std::pow(r, 2 * j - k) * f_radial(params.shifted(2 * j), r);
        sum += (j % 2 ? -term : term);
    }
    return sum;
}

double ell_limit(const KernelParams& params, int k) {
    if (k < 0) throw DomainError("ell_limit: k must be non-negative");
    const int N = params.N;
    const double s = params.s;
    double l0 = std::pow(2.0, (N + 4.0 * s) / 2.0) * s / M_PI * std::sin(M_PI * s) * std::tgamma((N + 2.0 * s) / 2.0) *
                std::tgamma(s);
    double prod = 1.0;
    for (int j = 0; j < k; ++j) prod *= N + 2.0 * s + j;
    return (k % 2 ? -1.0 : 1.0) * l0 * prod;
}

std::vector<double> kernel_gradient(const KernelParams& params, const Point& x, double t) {
    params.validate();
    if (!(t > 0.0)) throw DomainError("kernel_gradient: t must be positive");
    const int N = params.N;
    const double s = params.s;
    std::vector<double> g(N, 0.0);
    double R = norm(x);
    if (R == 0.0) return g;
    double r = R * std::pow(t, -1.0 / (2.0 * s));
    // DF_N(r) x_i/|x| = -F_{N+2}(r) r x_i/|x|, written without the division
    double c = -std::pow(t, -(N + 2.0) / (2.0 * s)) * std::pow(2.0 * M_PI, -N / 2.0) * f_radial(params.shifted(2), r);
    for (int i = 0; i < N; ++i) g[i] = c * x[i];
    return g;
}

std::vector<double> kernel_hessian(const KernelParams& params, const Point& x, double t) {
    params.validate();
    if (!(t > 0.0)) throw DomainError("kernel_hessian: t must be positive");
    const int N = params.N;
    const double s = params.s;
    double sc = std::pow(t, -1.0 / (2.0 * s));
    double r = norm(x) * sc;
    double pref = std::pow(t, -(N + 2.0) / (2.0 * s)) * std::pow(2.0 * M_PI, -N / 2.0);
    double f2 = f_radial(params.shifted(2), r);
    double f4 = r > 0.0 ? f_radial(params.shifted(4), r) : 0.0;
    std::vector<double> H(N * N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) H[i * N + j] = pref * ((i == j ? -f2 : 0.0) + f4 * x[i] * sc * x[j] * sc);
    return H;
}

double kernel_time_derivative(const KernelParams& params, const Point& x, double t) {
    params.validate();
    if (!(t > 0.0)) throw DomainError("kernel_time_derivative: t must be positive");
    const int N = params.N;
    const double s = params.s;
    double p = heat_kernel(params, x, t);
    auto g = kernel_gradient(params, x, t);
    double xg = 0.0;
    for (int i = 0; i < N; ++i) xg += x[i] * g[i];
    return -(N / (2.0 * s)) / t * p - (1.0 / (2.0 * s)) / t * xg;
}

VerificationReport verify_kernel_bounds(const KernelParams& params, const std::vector<std::pair<Point, double>>& grid,
                                        KernelBoundsSummary* summary) {
    params.validate();
    const int N = params.N;
    const double s = params.s;
    VerificationReport rep;
    rep.suite = "kernel-bounds";
    double pmin = std::numeric_limits<double>::infinity(), pmax = 0.0;
    double gmax = 0.0, hmax = 0.0, tmax = 0.0;
    Point wp_min, wp_max, wp_g, wp_h, wp_t;
    bool finite = true;
    auto pt = [](const Point& x, double t) {
        Point v = x;
        v.push_back(t);
        return v;
    };
    for (const auto& [x, t] : grid) {
        double R = norm(x);
        auto bound = [&](double a, double b) {
            // min{a, t/0} = a at the origin
            return R == 0.0 ? a : std::min(a, b);
        };
        double p = heat_kernel(params, x, t);
        double rp = p / bound(std::pow(t, -N / (2.0 * s)), t * std::pow(R, -(N + 2.0 * s)));
        auto g = kernel_gradient(params, x, t);
        double rg = norm(g) / bound(std::pow(t, -(N + 1.0) / (2.0 * s)), t * std::pow(R, -(N + 2.0 * s + 1.0)));
        auto H = kernel_hessian(params, x, t);
        double hm = 0.0;
        for (double v : H) hm = std::max(hm, std::abs(v));
        double rh = hm / bound(std::pow(t, -(N + 2.0) / (2.0 * s)), t * std::pow(R, -(N + 2.0 * s + 2.0)));
        double ptv = kernel_time_derivative(params, x, t);
        double rt = std::abs(ptv) / bound(std::pow(t, -N / (2.0 * s) - 1.0), std::pow(R, -(N + 2.0 * s)));
        finite = finite && std::isfinite(rp) && std::isfinite(rg) && std::isfinite(rh) && std::isfinite(rt);
        if (rp < pmin) pmin = rp, wp_min = pt(x, t);
        if (rp > pmax) pmax = rp, wp_max = pt(x, t);
        if (rg > gmax) gmax = rg, wp_g = pt(x, t);
        if (rh > hmax) hmax = rh, wp_h = pt(x, t);
        if (rt > tmax) tmax = rt, wp_t = pt(x, t);
    }
    rep.add({"p_ratio_min", pmin, 0.0, 0.0, pmin > 0.0 && std::isfinite(pmin), wp_min, "C1 estimate"});
    rep.add({"p_ratio_max", pmax, 0.0, 0.0, std::isfinite(pmax) && pmax > 0.0, wp_max, "C2 estimate"});
    rep.add({"grad_ratio_max", gmax, 0.0, 0.0, std::isfinite(gmax), wp_g, "|alpha| = 1"});
    rep.add({"hessian_ratio_max", hmax, 0.0, 0.0, std::isfinite(hmax), wp_h, "|alpha| = 2"});
    rep.add({"pt_ratio_max", tmax, 0.0, 0.0, std::isfinite(tmax) && finite, wp_t, "time derivative"});
    if (summary) *summary = {pmin, pmax, gmax, hmax, tmax};
    return rep;
}

std::shared_ptr<const RadialProfileTable> shared_profile_table(const KernelParams& params) {
    static std::mutex mu;
    static std::map<std::tuple<int, double, double>, std::shared_ptr<const RadialProfileTable>> cache;
    auto key = std::make_tuple(params.N, params.s, params.quad.rel_tol);
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto t = std::make_shared<const RadialProfileTable>(params);
    cache.emplace(key, t);
    return t;
}

double heat_kernel(const RadialProfileTable& table, const Point& x, double t) {
    const KernelParams& p = table.params();
    if (!(t > 0.0)) throw DomainError("heat_kernel: t must be positive");
    double r = norm(x) * std::pow(t, -1.0 / (2.0 * p.s));
    return std::pow(t, -p.N / (2.0 * p.s)) * std::pow(2.0 * M_PI, -p.N / 2.0) * table.f(r);
}

MassResult kernel_mass(const KernelParams& params, double t, double radius) {
    params.validate();
    if (!(t > 0.0)) throw DomainError("kernel_mass: t must be positive");
    const int N = params.N;
    const double s = params.s;
    const double area = 2.0 * std::pow(M_PI, N / 2.0) / std::tgamma(N / 2.0);
    const double sc = std::pow(t, 1.0 / (2.0 * s));
    const double R = radius * sc;
    MassResult m;
    m.radius = R;
    QuadratureConfig q = params.quad;
    q.abs_tol = 1e-13;
    q.rel_tol = 1e-12;
    std::vector<double> br{0.0};
    for (double x = sc / 8.0; x < R; x *= 1.5) br.push_back(x);
    br.push_back(R);
    Point x(N, 0.0);
    IntegralResult res = integrate_adaptive(
        [&](double rr) {
            x[0] = rr;
            return area * std::pow(rr, N - 1) * heat_kernel(params, x, t);
        },
        br, q);
    m.numeric = res.value;
    // int_R^inf rho^{N-1} sum_k c_k rho^{-N-2sk} = sum_k c_k radius^{-2sk} / (2sk), in scaled units
    const double l2 = std::log(2.0);
    double tail = 0.0, last = 0.0;
    for (int k = 1; k < 400; ++k) {
        double M = (N / 2.0 + 2.0 * s * k) * l2 + std::lgamma((N + 2.0 * s * k) / 2.0) + std::lgamma(1.0 + s * k) -
                   std::lgamma(k + 1.0) - 2.0 * s * k * std::log(radius);
        double mag = std::exp(M) / M_PI / (2.0 * s * k);
        if (k > 1 && mag > last && s >= 0.5) break;
        tail += (k % 2 ? 1.0 : -1.0) * mag * std::sin(M_PI * s * k);
        last = mag;
        if (mag < 1e-18) break;
    }
    m.tail = area * std::pow(2.0 * M_PI, -N / 2.0) * tail;
    m.total = m.numeric + m.tail;
    m.error_estimate = res.error_estimate + area * std::pow(2.0 * M_PI, -N / 2.0) * last;
    return m;
}

}  // namespace fracheat
