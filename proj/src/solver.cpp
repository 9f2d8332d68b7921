#include "fracheat/solver.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace fracheat {

void GridSpec::validate() const {
    if (N < 1) throw DomainError("grid: N must be >= 1");
    if (static_cast<int>(lo.size()) != N || static_cast<int>(hi.size()) != N || static_cast<int>(counts.size()) != N)
        throw DomainError("grid: box and counts must have N entries");
    for (int i = 0; i < N; ++i) {
        if (counts[i] < 2) throw DomainError("grid: node counts must be >= 2");
        if (!(hi[i] > lo[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i]))
            throw DomainError("grid: empty or non-finite box");
    }
    for (size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] >= 0.0) || !std::isfinite(times[k])) throw DomainError("grid: times must be >= 0");
        if (k > 0 && !(times[k] > times[k - 1])) throw DomainError("grid: times must increase strictly");
    }
}

size_t GridSpec::num_nodes() const {
    size_t n = 1;
    for (int c : counts) n *= static_cast<size_t>(c);
    return n;
}

Point GridSpec::node(size_t index) const {
    Point x(N);
    for (int i = 0; i < N; ++i) {
        size_t k = index % counts[i];
        index /= counts[i];
        x[i] = lo[i] + (hi[i] - lo[i]) * static_cast<double>(k) / (counts[i] - 1);
    }
    return x;
}

GridSpec GridSpec::line(double a, double b, int n, std::vector<double> times) {
    GridSpec g;
    g.N = 1;
    g.lo = {a};
    g.hi = {b};
    g.counts = {n};
    g.times = std::move(times);
    g.validate();
    return g;
}

double SolutionField::max_value() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& row : values)
        for (double v : row) m = std::max(m, v);
    return m;
}

double SolutionField::min_value() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& row : values)
        for (double v : row) m = std::min(m, v);
    return m;
}

int default_threads() {
    if (const char* env = std::getenv("FRACHEAT_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, 256));
    }
    return 1;
}

void parallel_for(size_t n, const std::function<void(size_t)>& fn, int threads) {
    if (threads <= 0) threads = default_threads();
    threads = static_cast<int>(std::min<size_t>(static_cast<size_t>(threads), std::max<size_t>(n, 1)));
    if (threads <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

namespace {

struct ConvGeometry {
    int N = 1;
    double lambda = 1.0;     // length scale of the kernel
    double scale = 1.0;      // datum feature length
    double omega = 0.0;      // datum frequency
    double centre = 0.0;     // |x - datum centre|
    double singular = std::numeric_limits<double>::infinity();
    double q = 1.0;          // tail decay exponent of the integrand in rho
    bool gaussian = false;   // classical kernel, no algebraic tail
    double gauss_width = 1.0;  // 1/sqrt(1 - 4tB): widening from exp(B|x|^2) data
};

ConvGeometry conv_geometry(const FunctionSpec& u0, const Point& x, double lambda, double decay) {
    ConvGeometry g;
    g.N = static_cast<int>(x.size());
    g.lambda = lambda;
    g.scale = u0.feature_scale();
    g.omega = u0.oscillation();
    Point c = x;
    if (!u0.offset().empty())
        for (size_t i = 0; i < c.size(); ++i) c[i] -= u0.offset()[i];
    g.centre = norm(c);
    g.singular = u0.singular_distance(x);
    GrowthEnvelope e = u0.effective_envelope();
    g.q = e.B > 0.0 ? decay - e.beta : decay;
    return g;
}

IntegralResult sum(IntegralResult a, const IntegralResult& b) {
    a.value += b.value;
    a.error_estimate += b.error_estimate;
    a.evaluations += b.evaluations;
    a.abs_value += b.abs_value;
    return a;
}

IntegralResult integrate(const Integrand& f, std::vector<double> pts, const QuadratureConfig& cfg) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    try {
        return integrate_adaptive(f, pts, cfg);
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(std::string("convolution quadrature: ") + e.what(), e.best());
    }
}

// int_0^inf f(rho) d rho for f = rho^{N-1} W(rho) [M(rho) - K], W the
// radial kernel profile.  Panels follow the datum features mapped to rho;
// beyond R the integrand decays like rho^{-1-q} (substitution onto (0,1])
// or oscillates (half-period summation with extrapolation).  For oscillating
// data `smooth` is the non-oscillating piece rho^{N-1} W K of f, moved to
// the substitution tail so the half-period sums decay geometrically.
IntegralResult radial_convolution(const Integrand& f, const ConvGeometry& g, const QuadratureConfig& cfg,
                                  const Integrand& smooth = {}) {
    const double lam = g.lambda;
    const double rc = g.centre / lam, rs = g.scale / lam;
    std::vector<double> pts{0.0};
    double R;
    if (g.gaussian) {
        R = 12.0 * g.gauss_width + rc + 8.0 * rs;
    } else {
        R = std::max(64.0, 4.0 * (rc + 8.0 * rs));
        if (std::isfinite(g.singular)) R = std::max(R, 4.0 * g.singular / lam);
    }
    for (double p = 0.125; p < R; p *= 2.0) pts.push_back(p);
    for (double p : {rc, rc - rs, rc + rs, rc - 4.0 * rs, rc + 4.0 * rs, g.singular / lam})
        if (std::isfinite(p) && p > 0.0 && p < R) pts.push_back(p);
    double hp = g.omega > 0.0 ? M_PI / (g.omega * lam) : std::numeric_limits<double>::infinity();
    bool oscillating = !g.gaussian && hp <= 0.25 * R;
    if (hp < R && hp > R / 4000.0)
        for (double p = hp; p < R; p += hp) pts.push_back(p);
    pts.push_back(R);
    IntegralResult near = integrate(f, pts, cfg);
    if (g.gaussian) return near;

    auto substituted = [&](const Integrand& h, double q) {
        auto fw = [&](double w) {
            if (w <= 0.0) return 0.0;
            double rho = R * std::pow(w, -1.0 / q);
            if (!std::isfinite(rho)) return 0.0;
            double v = h(rho) * (R / q) * std::pow(w, -1.0 / q - 1.0);
            return std::isfinite(v) ? v : 0.0;
        };
        return integrate(fw, {0.0, 1e-8, 1e-4, 1e-2, 0.1, 1.0}, cfg);
    };
    if (!oscillating) return sum(near, substituted(f, g.q));
    IntegralResult far;
    try {
        if (smooth) {
            far = integrate_oscillatory_tail([&](double r) { return f(r) + smooth(r); }, R, hp, cfg);
            IntegralResult k = substituted(smooth, g.q);
            k.value = -k.value;
            far = sum(far, k);
        } else {
            far = integrate_oscillatory_tail(f, R, hp, cfg);
        }
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(std::string("convolution tail: ") + e.what(), e.best());
    }
    return sum(near, far);
}

// mean of exp(i k w_1) over the unit sphere of R^N, minus 1:
// Gamma(N/2) (2/k)^{N/2-1} J_{N/2-1}(k) - 1
double plane_wave_mean_minus_one(int N, double k) {
    if (k < 2.0) {
        double term = 1.0, acc = 0.0;
        for (int m = 1; m < 40; ++m) {
            term *= -0.25 * k * k / (m * (m - 1 + 0.5 * N));
            acc += term;
            if (std::abs(term) < 1e-17 * std::abs(acc)) break;
        }
        return acc;
    }
    switch (N) {
        case 1: return std::cos(k) - 1.0;
        case 2: return boost::math::cyl_bessel_j(0, k) - 1.0;
        default: return std::sin(k) / k - 1.0;
    }
}

// M(r) - |S| u0(x): spherical integral of the symmetric mean minus the centre
// value, taken from the datum's second difference to avoid cancellation
double sphere_excess(const FunctionSpec& u0, const Point& x, double r) {
    const int N = static_cast<int>(x.size());
    if (u0.family() == Family::Cosine)
        return sphere_area(N) * u0.value(x) * plane_wave_mean_minus_one(N, norm(u0.params()) * r);
    return sphere_integral(
        N,
        [&](const Point& w) {
            Point z(N);
            for (int i = 0; i < N; ++i) z[i] = r * w[i];
            return -0.5 * u0.second_difference(x, z);
        },
        true);
}

// absolute tolerance relative to the datum size at x
QuadratureConfig scaled(QuadratureConfig cfg, double ux) {
    cfg.abs_tol *= std::max(1.0, std::abs(ux));
    return cfg;
}

void check_datum(const FunctionSpec& u0, const Point& x, const KernelParams& params) {
    params.validate();
    if (static_cast<int>(x.size()) != params.N) throw DomainError("point dimension differs from N");
    if (params.N > 3) throw DomainError("convolution supports N <= 3");
    u0.check_point(x);
    GrowthEnvelope e = u0.effective_envelope();
    if (e.B > 0.0 && e.beta >= 2.0 * params.s)
        throw DomainError("datum growth exponent " + std::to_string(e.beta) + " >= 2s: the convolution diverges");
}

}  // namespace

PointValue solve_point(const FunctionSpec& u0, const Point& x, double t, const KernelParams& params) {
    check_datum(u0, x, params);
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time must be >= 0");
    PointValue out;
    const double ux = u0.value(x);
    if (t == 0.0 || u0.constant_like()) {
        out.value = ux;
        return out;
    }
    const int N = params.N;
    const double s = params.s;
    const double lam = std::pow(t, 1.0 / (2.0 * s));
    auto table = shared_profile_table(params);
    const double K = sphere_area(N) * ux;
    const double pref = std::pow(2.0 * M_PI, -0.5 * N);
    auto f = [&](double rho) {
        if (rho <= 0.0 && N > 1) return 0.0;
        double m = sphere_excess(u0, x, lam * rho);
        return std::pow(rho, N - 1) * table->f(rho) * m;
    };
    auto kf = [&](double rho) { return rho <= 0.0 && N > 1 ? 0.0 : std::pow(rho, N - 1) * table->f(rho) * K; };
    ConvGeometry g = conv_geometry(u0, x, lam, 2.0 * s);
    IntegralResult r = radial_convolution(f, g, scaled(params.quad, ux), kf);
    out.value = ux + pref * r.value;
    out.error_estimate = pref * (r.error_estimate + 10.0 * table->interpolation_error() * r.abs_value);
    return out;
}

SolutionField solve_canonical(const FunctionSpec& u0, const GridSpec& grid, const KernelParams& params, int threads) {
    grid.validate();
    params.validate();
    if (grid.N != params.N) throw DomainError("grid dimension differs from N");
    GrowthEnvelope e = u0.effective_envelope();
    if (e.B > 0.0 && e.beta >= 2.0 * params.s)
        throw DomainError("datum growth exponent " + std::to_string(e.beta) + " >= 2s: the convolution diverges");
    SolutionField out;
    out.grid = grid;
    out.datum = u0;
    const size_t n = grid.num_nodes(), nt = grid.times.size();
    out.values.assign(nt, std::vector<double>(n, 0.0));
    out.errors.assign(nt, std::vector<double>(n, 0.0));
    shared_profile_table(params);
    parallel_for(
        n * nt,
        [&](size_t idx) {
            size_t k = idx / n, i = idx % n;
            Point x = grid.node(i);
            double t = grid.times[k];
            if (t == 0.0) {
                out.values[k][i] = u0.value(x);
                return;
            }
            PointValue v = solve_point(u0, x, t, params);
            out.values[k][i] = v.value;
            out.errors[k][i] = v.error_estimate;
        },
        threads);
    return out;
}

PointValue time_derivative_detail(const FunctionSpec& u0, const Point& x, double t, const KernelParams& params) {
    check_datum(u0, x, params);
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("time_derivative needs t > 0");
    PointValue out;
    if (u0.affine_like()) return out;
    const int N = params.N;
    const double s = params.s;
    const double lam = std::pow(t, 1.0 / (2.0 * s));
    auto table = shared_profile_table(params);
    const double K = sphere_area(N) * u0.value(x);
    const double pref = std::pow(2.0 * M_PI, -0.5 * N) / t;
    auto f = [&](double rho) {
        if (rho <= 0.0 && N > 1) return 0.0;
        double G = -(N * table->f(rho) - rho * rho * table->f2(rho)) / (2.0 * s);
        double m = sphere_excess(u0, x, lam * rho);
        return std::pow(rho, N - 1) * G * m;
    };
    auto kf = [&](double rho) {
        if (rho <= 0.0 && N > 1) return 0.0;
        return std::pow(rho, N - 1) * K * -(N * table->f(rho) - rho * rho * table->f2(rho)) / (2.0 * s);
    };
    ConvGeometry g = conv_geometry(u0, x, lam, 2.0 * s);
    IntegralResult r = radial_convolution(f, g, scaled(params.quad, K), kf);
    out.value = pref * r.value;
    out.error_estimate = pref * (r.error_estimate + 10.0 * table->interpolation_error() * r.abs_value);
    return out;
}

double time_derivative(const FunctionSpec& u0, const Point& x, double t, const KernelParams& params) {
    return time_derivative_detail(u0, x, t, params).value;
}

namespace {

// least-squares fit of the even part c0 + c2 r^2 + c4 r^4 to the symmetric
// means e_k = (w(x + k h d) + w(x - k h d))/2, k = 0..3
std::pair<double, double> even_fit(const double e[4], double h) {
    double A[4][3], rhs[4];
    for (int k = 0; k < 4; ++k) {
        double r2 = (k * h) * (k * h);
        A[k][0] = 1.0;
        A[k][1] = r2;
        A[k][2] = r2 * r2;
        rhs[k] = e[k];
    }
    double M[3][4] = {};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 4; ++k) M[i][j] += A[k][i] * A[k][j];
        for (int k = 0; k < 4; ++k) M[i][3] += A[k][i] * rhs[k];
    }
    for (int c = 0; c < 3; ++c) {
        for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            double f = M[r][c] / M[c][c];
            for (int k = c; k < 4; ++k) M[r][k] -= f * M[c][k];
        }
    }
    return {M[1][3] / M[1][1], M[2][3] / M[2][2]};
}

}  // namespace

namespace {

bool radial_datum(const FunctionSpec& u) {
    switch (u.family()) {
        case Family::Constant:
        case Family::Quadratic:
        case Family::Gaussian:
        case Family::AbsPower: return true;
        default: return false;
    }
}

// W(r) = u(c + r e_1, t) for radial data, as V(xi) cosh(xi)^beta with
// r = ell sinh(xi) on a uniform xi grid; nodes at xi < 0 mirror xi > 0.
class RadialSpline {
public:
    RadialSpline(const FunctionSpec& u0, double t, const KernelParams& params, double ell) : ell_(ell) {
        GrowthEnvelope e = u0.effective_envelope();
        beta_ = e.B > 0.0 ? e.beta : 0.0;
        const int n = 241, pad = 6;
        step_ = xi_max_ / (n - 1);
        std::vector<double> pos(n);
        const int N = params.N;
        parallel_for(n, [&](size_t i) {
            double xi = step_ * static_cast<double>(i);
            Point y(N, 0.0);
            if (!u0.offset().empty()) y = u0.offset();
            y[0] += ell_ * std::sinh(xi);
            pos[i] = solve_point(u0, y, t, params).value / std::pow(std::cosh(xi), beta_);
        });
        std::vector<double> v(pos.rend() - pad - 1, pos.rend() - 1);
        v.insert(v.end(), pos.begin(), pos.end());
        spline_.emplace(v, -step_ * pad, step_);
        Point y(N, 0.0);
        if (!u0.offset().empty()) y = u0.offset();
        y[0] += r_max();
        far_offset_ = (*this)(r_max()) - u0.value(y);
    }

    double r_max() const { return ell_ * std::sinh(xi_max_ - step_); }
    double beta() const { return beta_; }
    // W - u0 at r_max
    double far_offset() const { return far_offset_; }
    double operator()(double r) const {
        double xi = std::asinh(r / ell_);
        return (*spline_)(xi) * std::pow(std::cosh(xi), beta_);
    }

private:
    double ell_, beta_ = 0.0, step_ = 0.0, far_offset_ = 0.0;
    double xi_max_ = 16.0;
    std::optional<boost::math::interpolators::cardinal_quintic_b_spline<double>> spline_;
};

}  // namespace

ResidualResult pde_residual_detail(const FunctionSpec& u0, const Point& x, double t, const KernelParams& params) {
    check_datum(u0, x, params);
    if (!(t > 0.0)) throw DomainError("pde_residual needs t > 0");
    const int N = params.N;
    const double s = params.s;
    const double lam = std::pow(t, 1.0 / (2.0 * s));
    ResidualResult out;
    PointValue ut = time_derivative_detail(u0, x, t, params);
    out.u_t = ut.value;

    auto w = [&](const Point& y) { return solve_point(u0, y, t, params).value; };
    const double wx = w(x);
    const double L = std::max(std::min(u0.feature_scale(), 1.0), std::min(lam, 1.0));
    const double h = 0.04 * L;
    out.stencil_step = h;

    // directional even fits along the axes and, for N > 1, the diagonals
    auto fit_along = [&](const Point& d) {
        double e[4];
        e[0] = wx;
        for (int k = 1; k <= 3; ++k) {
            Point a = x, b = x;
            for (int i = 0; i < N; ++i) {
                a[i] += k * h * d[i];
                b[i] -= k * h * d[i];
            }
            e[k] = 0.5 * (w(a) + w(b));
        }
        return even_fit(e, h);
    };
    std::vector<double> H(N * N, 0.0);
    double c4_1d = 0.0;
    for (int i = 0; i < N; ++i) {
        Point d(N, 0.0);
        d[i] = 1.0;
        auto [c2, c4] = fit_along(d);
        H[i * N + i] = 2.0 * c2;
        if (N == 1) c4_1d = c4;
    }
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            Point d(N, 0.0);
            d[i] = d[j] = 1.0 / std::sqrt(2.0);
            double q = 2.0 * fit_along(d).first;
            H[i * N + j] = H[j * N + i] = q - 0.5 * (H[i * N + i] + H[j * N + j]);
        }
    // the 1-D fit carries the quartic term and covers the whole stencil
    const double r_poly = N == 1 ? 3.0 * h : h;

    // far field: for radial data in N > 1, u(., t) is radial about the datum
    // centre and is read from a spline in asinh(r / ell)
    std::function<double(const Point&)> w_far = w;
    std::optional<RadialSpline> spline;
    if (N > 1 && radial_datum(u0)) {
        spline.emplace(u0, t, params, std::max(L, lam));
        w_far = [&](const Point& y) {
            Point c = y;
            if (!u0.offset().empty())
                for (int i = 0; i < N; ++i) c[i] -= u0.offset()[i];
            double r = norm(c);
            if (r <= spline->r_max()) return (*spline)(r);
            // u - u0 = O(t r^{beta - 2s}) far out
            return u0.value(y) + spline->far_offset() * std::pow(spline->r_max() / r, 2.0 * s - spline->beta());
        };
    }

    FieldView v;
    v.value = [&](const Point& y) {
        double d = 0.0;
        for (int i = 0; i < N; ++i) d += (y[i] - x[i]) * (y[i] - x[i]);
        return d == 0.0 ? wx : w_far(y);
    };
    v.second_difference = [&](const Point& y, const Point& z) {
        double r2 = 0.0;
        for (double c : z) r2 += c * c;
        if (r2 <= r_poly * r_poly) {
            double q = 0.0;
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) q += z[i] * H[i * N + j] * z[j];
            return -q - 2.0 * c4_1d * r2 * r2;
        }
        Point a = y, b = y;
        for (int i = 0; i < N; ++i) {
            a[i] += z[i];
            b[i] -= z[i];
        }
        return 2.0 * wx - w_far(a) - w_far(b);
    };
    GrowthEnvelope e = u0.effective_envelope();
    e.upper_only = false;
    v.envelope = e;
    v.scale = std::max(u0.feature_scale(), std::min(lam, 1.0));
    v.oscillation = u0.oscillation();
    v.centre = u0.offset();
    QuadratureConfig cfg = params.quad;
    cfg.rel_tol = std::max(cfg.rel_tol, 1e-8);
    cfg.abs_tol = std::max(cfg.abs_tol, 1e-9);
    FracLapResult fl = frac_laplacian(v, x, s, cfg);
    out.frac_lap = fl.value;
    out.residual = out.u_t + out.frac_lap;
    out.error_estimate = ut.error_estimate + fl.error_estimate;
    return out;
}

double pde_residual(const FunctionSpec& u0, const Point& x, double t, const KernelParams& params) {
    return pde_residual_detail(u0, x, t, params).residual;
}

EnvelopeTrace envelope_propagate(const FunctionSpec& u0, const KernelParams& params, const std::vector<double>& times,
                                 int threads) {
    params.validate();
    EnvelopeTrace tr;
    tr.times = times;
    tr.report.suite = "envelope";
    const GrowthEnvelope e0 = u0.effective_envelope();
    const double s = params.s;
    const double beta = e0.B > 0.0 ? e0.beta : 0.0;
    if (e0.B > 0.0 && beta >= 2.0 * s) throw DomainError("envelope_propagate: growth exponent >= 2s");
    const double c = beta > 1.0 ? std::pow(2.0, beta - 1.0) : 1.0;
    tr.B = 4.0 * c * e0.B;
    tr.exponent_bound = e0.B > 0.0 ? 1.0 - (2.0 * s - beta) / (2.0 * s) : 0.0;

    std::vector<Point> pts;
    for (double r : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0})
        for (double sgn : {1.0, -1.0}) {
            if (r == 0.0 && sgn < 0.0) continue;
            Point x(params.N, 0.0);
            x[0] = sgn * r;
            if (params.N > 1 && r > 0.0) {
                x[0] = sgn * r / std::sqrt(2.0);
                x[1] = r / std::sqrt(2.0);
            }
            pts.push_back(x);
        }
    tr.A.assign(times.size(), 0.0);
    std::vector<double> vals(times.size() * pts.size());
    parallel_for(
        vals.size(),
        [&](size_t idx) {
            size_t k = idx / pts.size(), i = idx % pts.size();
            vals[idx] = solve_point(u0, pts[i], times[k], params).value;
        },
        threads);
    for (size_t k = 0; k < times.size(); ++k) {
        double a = -std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < pts.size(); ++i) {
            double r = norm(pts[i]);
            a = std::max(a, std::abs(vals[k * pts.size() + i]) - (tr.B > 0.0 ? tr.B * std::pow(r, beta) : 0.0));
        }
        tr.A[k] = a;
    }
    bool positive = std::all_of(tr.A.begin(), tr.A.end(), [](double a) { return a > 0.0; });
    tr.report.add({"A_positive", *std::min_element(tr.A.begin(), tr.A.end()), 0.0, 0.0, positive, {}, ""});
    // slope of log A against log t over times > 0
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    bool decreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < times.size(); ++k) {
        if (times[k] <= 0.0 || tr.A[k] <= 0.0) continue;
        double ratio = tr.A[k] / times[k];
        if (ratio >= prev) decreasing = false;
        prev = ratio;
        double lx = std::log(times[k]), ly = std::log(tr.A[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    tr.fitted_exponent = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
    tr.report.add({"A_over_t_decreasing", prev, 0.0, 0.0, decreasing, {}, "A(t)/t strictly decreasing"});
    if (e0.B > 0.0) {
        tr.report.add({"fitted_exponent", tr.fitted_exponent, tr.exponent_bound + 0.1, 0.1,
                       tr.fitted_exponent <= tr.exponent_bound + 0.1, {}, "A(t) = O(t^{1-sigma/2s})"});
    } else {
        double amax = *std::max_element(tr.A.begin(), tr.A.end());
        tr.report.add({"A_bounded", amax, e0.A, 1e-6, amax <= e0.A + 1e-6, {}, "bounded datum"});
    }
    return tr;
}

VerificationReport initial_continuity_check(const FunctionSpec& u0, const Point& x0, const KernelParams& params,
                                            int n_max, double tolerance) {
    VerificationReport rep;
    rep.suite = "initial_continuity";
    const double target = u0.value(x0);
    double prev = std::numeric_limits<double>::infinity(), last = 0.0;
    bool mono = true;
    for (int n = 1; n <= n_max; ++n) {
        Point x = x0;
        x[0] += std::ldexp(1.0, -n);
        double t = std::ldexp(1.0, -2 * n);
        PointValue v = solve_point(u0, x, t, params);
        double gap = std::abs(v.value - target);
        if (gap > prev + 10.0 * v.error_estimate + 1e-12) mono = false;
        prev = gap;
        last = gap;
        rep.add({"gap_n" + std::to_string(n), gap, 0.0, v.error_estimate, true, x, ""});
    }
    rep.add({"monotone", mono ? 0.0 : 1.0, 0.0, 0.0, mono, x0, "|u(x_n,t_n) - u0(x0)| non-increasing"});
    rep.add({"final_gap", last, tolerance, tolerance, last <= tolerance, x0, ""});
    return rep;
}

VerificationReport semigroup_check(const KernelParams& params, double t1, double t2, double half_width, int samples,
                                   double tolerance, int threads) {
    params.validate();
    if (params.N != 1) throw DomainError("semigroup_check is one-dimensional");
    if (!(t1 > 0.0 && t2 > 0.0)) throw DomainError("semigroup_check needs positive times");
    if (samples < 2) throw DomainError("semigroup_check needs >= 2 samples");
    auto table = shared_profile_table(params);
    const double s = params.s;
    const double l1 = std::pow(t1, 0.5 / s), l2 = std::pow(t2, 0.5 / s);
    QuadratureConfig cfg = params.quad;
    cfg.rel_tol = std::min(cfg.rel_tol, 1e-10);
    cfg.abs_tol = std::min(cfg.abs_tol, 1e-12);
    std::vector<double> err(samples), conv(samples);
    parallel_for(
        samples,
        [&](size_t i) {
            const double x = -half_width + 2.0 * half_width * static_cast<double>(i) / (samples - 1);
            auto g = [&](double y) {
                return heat_kernel(*table, {y}, t1) * heat_kernel(*table, {x - y}, t2);
            };
            auto both = [&](double y) { return g(y) + g(-y); };
            const double R = 4.0 * (std::abs(x) + 8.0 * std::max(l1, l2));
            std::vector<double> pts{0.0, std::abs(x), R};
            for (double l : {l1, l2})
                for (double c : {0.0, std::abs(x)})
                    for (double k : {-4.0, -1.0, 1.0, 4.0})
                        if (c + k * l > 0.0 && c + k * l < R) pts.push_back(c + k * l);
            for (double p = 0.125; p < R; p *= 2.0) pts.push_back(p);
            IntegralResult near = integrate(both, pts, cfg);
            const double q = 2.0 * s;
            auto fw = [&](double w) {
                if (w <= 0.0) return 0.0;
                double y = R * std::pow(w, -1.0 / q);
                double v = both(y) * (R / q) * std::pow(w, -1.0 / q - 1.0);
                return std::isfinite(v) ? v : 0.0;
            };
            IntegralResult far = integrate(fw, {0.0, 1e-8, 1e-4, 1e-2, 0.1, 1.0}, cfg);
            conv[i] = near.value + far.value;
            err[i] = std::abs(conv[i] - heat_kernel(*table, {x}, t1 + t2));
        },
        threads);
    VerificationReport rep;
    rep.suite = "semigroup";
    size_t worst = std::max_element(err.begin(), err.end()) - err.begin();
    const double xw = -half_width + 2.0 * half_width * static_cast<double>(worst) / (samples - 1);
    rep.add({"sup_error", err[worst], tolerance, tolerance, err[worst] <= tolerance, {xw},
             "p(.,t1) * p(.,t2) against p(.,t1+t2)"});
    return rep;
}

double ClassicalParams::max_time() const {
    return B > 0.0 ? 1.0 / (4.0 * B) : std::numeric_limits<double>::infinity();
}

PointValue solve_classical_point(const FunctionSpec& u0, const Point& x, double t, const ClassicalParams& params) {
    if (static_cast<int>(x.size()) != params.N) throw DomainError("point dimension differs from N");
    if (params.N > 3) throw DomainError("convolution supports N <= 3");
    if (!(params.B >= 0.0)) throw DomainError("exponential growth rate must be >= 0");
    if (!(t >= 0.0)) throw DomainError("time must be >= 0");
    if (t >= params.max_time())
        throw DomainError("t = " + std::to_string(t) + " is beyond the maximal existence time T = 1/(4B) = " +
                          std::to_string(params.max_time()));
    u0.check_point(x);
    PointValue out;
    const double ux = u0.value(x);
    if (t == 0.0 || u0.constant_like()) {
        out.value = ux;
        return out;
    }
    const int N = params.N;
    const double lam = 2.0 * std::sqrt(t);
    auto f = [&](double rho) {
        if (rho <= 0.0 && N > 1) return 0.0;
        return std::pow(rho, N - 1) * std::exp(-rho * rho) * sphere_excess(u0, x, lam * rho);
    };
    ConvGeometry g = conv_geometry(u0, x, lam, 2.0);
    g.gaussian = true;
    g.gauss_width = 1.0 / std::sqrt(1.0 - 4.0 * t * params.B);
    IntegralResult r = radial_convolution(f, g, scaled(params.quad, ux));
    const double pref = std::pow(M_PI, -0.5 * N);
    out.value = ux + pref * r.value;
    out.error_estimate = pref * r.error_estimate;
    return out;
}

PointValue classical_time_derivative(const FunctionSpec& u0, const Point& x, double t, const ClassicalParams& params) {
    if (static_cast<int>(x.size()) != params.N) throw DomainError("point dimension differs from N");
    if (!(t > 0.0)) throw DomainError("time derivative needs t > 0");
    if (t >= params.max_time())
        throw DomainError("t = " + std::to_string(t) + " is beyond the maximal existence time T = 1/(4B) = " +
                          std::to_string(params.max_time()));
    u0.check_point(x);
    PointValue out;
    if (u0.affine_like()) return out;
    const int N = params.N;
    const double lam = 2.0 * std::sqrt(t);
    auto f = [&](double rho) {
        if (rho <= 0.0 && N > 1) return 0.0;
        return std::pow(rho, N - 1) * std::exp(-rho * rho) * (rho * rho - 0.5 * N) * sphere_excess(u0, x, lam * rho);
    };
    ConvGeometry g = conv_geometry(u0, x, lam, 2.0);
    g.gaussian = true;
    g.gauss_width = 1.0 / std::sqrt(1.0 - 4.0 * t * params.B);
    IntegralResult r = radial_convolution(f, g, scaled(params.quad, u0.value(x)));
    const double pref = std::pow(M_PI, -0.5 * N) / t;
    out.value = pref * r.value;
    out.error_estimate = pref * r.error_estimate;
    return out;
}

SolutionField solve_classical(const FunctionSpec& u0, const GridSpec& grid, const ClassicalParams& params,
                              int threads) {
    grid.validate();
    if (grid.N != params.N) throw DomainError("grid dimension differs from N");
    for (double t : grid.times)
        if (t >= params.max_time())
            throw DomainError("t = " + std::to_string(t) + " is beyond the maximal existence time T = 1/(4B) = " +
                              std::to_string(params.max_time()));
    SolutionField out;
    out.grid = grid;
    out.datum = u0;
    const size_t n = grid.num_nodes(), nt = grid.times.size();
    out.values.assign(nt, std::vector<double>(n, 0.0));
    out.errors.assign(nt, std::vector<double>(n, 0.0));
    parallel_for(
        n * nt,
        [&](size_t idx) {
            size_t k = idx / n, i = idx % n;
            PointValue v = solve_classical_point(u0, grid.node(i), grid.times[k], params);
            out.values[k][i] = v.value;
            out.errors[k][i] = v.error_estimate;
        },
        threads);
    return out;
}

}  // namespace fracheat
