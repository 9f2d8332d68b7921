#include "fracheat/fraclap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include <boost/math/special_functions/legendre.hpp>

namespace fracheat {

double normalizing_constant(int N, double s) {
    if (N < 1) throw DomainError("normalizing_constant: N must be >= 1");
    if (!(s > 0.0 && s < 1.0)) throw DomainError("normalizing_constant: s must lie in (0,1)");
    return std::exp(2.0 * s * std::log(2.0) + std::log(s) + std::lgamma(0.5 * N + s) - 0.5 * N * std::log(M_PI) -
                    std::lgamma(1.0 - s));
}

double sphere_area(int N) { return 2.0 * std::pow(M_PI, 0.5 * N) / std::tgamma(0.5 * N); }

namespace {

struct SphereRule {
    std::vector<Point> dirs;
    std::vector<double> weights;
};

// Gauss-Legendre on [-1, 1]
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    auto pos = boost::math::legendre_p_zeros<double>(n);
    x.clear();
    w.clear();
    for (double z : pos) {
        double dp = boost::math::legendre_p_prime<double>(n, z);
        double wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x.push_back(z);
        w.push_back(wt);
        if (z != 0.0) {
            x.push_back(-z);
            w.push_back(wt);
        }
    }
}

// Rule on the unit sphere of R^N (N = 2, 3) at refinement m.  half: only
// directions with a non-negative leading coordinate, weights doubled, for
// integrands even in the direction.
SphereRule make_rule(int N, int m, bool half) {
    SphereRule r;
    if (N == 2) {
        int M = half ? m : 2 * m;
        double span = half ? M_PI : 2.0 * M_PI;
        for (int k = 0; k < M; ++k) {
            double th = span * k / M;
            r.dirs.push_back({std::cos(th), std::sin(th)});
            r.weights.push_back(2.0 * M_PI / M);
        }
        return r;
    }
    std::vector<double> gx, gw;
    gauss_legendre(m, gx, gw);
    const int M = 2 * m;
    for (size_t i = 0; i < gx.size(); ++i) {
        double mu = half ? 0.5 * (gx[i] + 1.0) : gx[i];
        // half: d mu = dx/2, doubled for the mirrored hemisphere
        double wmu = gw[i];
        double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        for (int k = 0; k < M; ++k) {
            double ph = 2.0 * M_PI * k / M;
            r.dirs.push_back({mu, st * std::cos(ph), st * std::sin(ph)});
            r.weights.push_back(wmu * 2.0 * M_PI / M);
        }
    }
    return r;
}

const SphereRule& cached_rule(int N, int m, bool half) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, bool>, SphereRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(N, m, half);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, make_rule(N, m, half)).first;
    return it->second;
}

// int_{S^{N-1}} f(omega) d omega, refined until two levels agree
template <class F>
double sphere_sum(int N, const F& f, bool half) {
    if (N == 1) return half ? 2.0 * f(Point{1.0}) : f(Point{1.0}) + f(Point{-1.0});
    const int m0 = N == 2 ? 8 : 4, m_cap = N == 2 ? 4096 : 128;
    auto apply = [&](int m, double& absum) {
        const SphereRule& r = cached_rule(N, m, half);
        double acc = 0.0;
        absum = 0.0;
        for (size_t i = 0; i < r.dirs.size(); ++i) {
            double v = r.weights[i] * f(r.dirs[i]);
            acc += v;
            absum += std::abs(v);
        }
        return acc;
    };
    double a0 = 0.0, a1 = 0.0;
    double prev = apply(m0, a0);
    for (int m = 2 * m0; m <= m_cap; m *= 2) {
        double cur = apply(m, a1);
        if (std::abs(cur - prev) <= 1e-13 * a1 + 1e-300) return cur;
        prev = cur;
    }
    return prev;
}

}  // namespace

double sphere_integral(int N, const std::function<double(const Point&)>& f, bool even) {
    if (N < 1 || N > 3) throw DomainError("sphere_integral: 1 <= N <= 3");
    return sphere_sum(N, f, even);
}

namespace {

IntegralResult adaptive(const Integrand& f, std::vector<double> pts, const QuadratureConfig& cfg) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    try {
        return integrate_adaptive(f, pts, cfg);
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(std::string("fractional Laplacian quadrature: ") + e.what(), e.best());
    }
}

IntegralResult add(IntegralResult a, const IntegralResult& b) {
    a.value += b.value;
    a.error_estimate += b.error_estimate;
    a.evaluations += b.evaluations;
    a.abs_value += b.abs_value;
    return a;
}

struct Geometry {
    int N = 1;
    double s = 0.5;
    double scale = 1.0;       // feature length of the data
    double omega = 0.0;       // oscillation frequency
    double centre = 0.0;      // distance from x to the data centre
    double singular = 0.0;    // distance from x to the non-smooth set
    double q = 0.0;           // tail substitution exponent
};

Geometry geometry(const FunctionSpec& u, const Point& x, double s) {
    Geometry g;
    g.N = static_cast<int>(x.size());
    g.s = s;
    g.scale = u.feature_scale();
    g.omega = u.oscillation();
    Point c = x;
    if (!u.offset().empty())
        for (size_t i = 0; i < c.size(); ++i) c[i] -= u.offset()[i];
    g.centre = norm(c);
    g.singular = u.singular_distance(x);
    GrowthEnvelope e = u.effective_envelope();
    g.q = e.B > 0.0 ? 2.0 * s - e.beta : 2.0 * s;
    return g;
}

// int_lo^inf rho^{-1-2s} S(rho) d rho.  For oscillating data S = K - T with
// a constant K, whose tail is done analytically.
IntegralResult radial_integral(const Integrand& S, const Integrand& T, double K, double lo, const Geometry& g,
                               const QuadratureConfig& cfg) {
    const double s = g.s;
    auto weighted = [&](double rho) { return S(rho) * std::pow(rho, -1.0 - 2.0 * s); };
    std::vector<double> pts{lo};
    double R1;
    if (g.omega > 0.0) {
        double hp = M_PI / g.omega;
        R1 = lo + 8.0 * hp;
        for (double p = lo + hp; p < R1; p += hp) pts.push_back(p);
    } else {
        R1 = std::max({4.0 * lo, g.centre + 8.0 * g.scale, 1.0});
        if (std::isfinite(g.singular)) R1 = std::max(R1, 2.0 * g.singular);
        for (double p = 2.0 * lo; p < R1; p *= 2.0) pts.push_back(p);
    }
    pts.push_back(R1);
    for (double p : {g.centre, g.singular, g.centre - g.scale, g.centre + g.scale})
        if (std::isfinite(p) && p > lo && p < R1) pts.push_back(p);
    IntegralResult mid = adaptive(weighted, pts, cfg);

    IntegralResult far;
    if (g.omega > 0.0) {
        auto wt = [&](double rho) { return T(rho) * std::pow(rho, -1.0 - 2.0 * s); };
        try {
            far = integrate_oscillatory_tail(wt, R1, M_PI / g.omega, cfg);
        } catch (const ConvergenceError& e) {
            throw ConvergenceError(std::string("fractional Laplacian tail: ") + e.what(), e.best());
        }
        far.value = K * std::pow(R1, -2.0 * s) / (2.0 * s) - far.value;
    } else {
        // rho = R1 w^{-1/q} maps [R1, inf) to (0, 1]; growth rho^{2s-q} of S
        // is absorbed by the Jacobian
        const double q = g.q;
        const double pre = std::pow(R1, -2.0 * s) / q;
        auto fw = [&](double w) {
            if (w <= 0.0) return 0.0;
            double rho = R1 * std::pow(w, -1.0 / q);
            if (!std::isfinite(rho)) return 0.0;
            return pre * std::pow(w, 2.0 * s / q - 1.0) * S(rho);
        };
        far = adaptive(fw, {0.0, 1e-6, 1e-3, 0.1, 1.0}, cfg);
    }
    return add(mid, far);
}

void check_inputs(const FunctionSpec& u, const Point& x, double s) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("s must lie in (0,1)");
    u.check_point(x);
    if (x.size() > 3) throw DomainError("numerical evaluation supports N <= 3");
    for (double c : x)
        if (!std::isfinite(c)) throw DomainError("point has non-finite coordinates");
}

}  // namespace

FracLapResult frac_laplacian(const FieldView& u, const Point& x, double s, const QuadratureConfig& cfg) {
    cfg.validate();
    if (!(s > 0.0 && s < 1.0)) throw DomainError("s must lie in (0,1)");
    if (x.empty() || x.size() > 3) throw DomainError("numerical evaluation supports 1 <= N <= 3");
    if (!u.value || !u.second_difference) throw DomainError("field view needs value and second difference");
    const GrowthEnvelope& env = u.envelope;
    if (env.B > 0.0 && env.beta >= 2.0 * s)
        throw DomainError("growth exponent " + std::to_string(env.beta) + " >= 2s: (-Delta)^s u is not defined by "
                          "the second-difference integral");
    Geometry g;
    g.N = static_cast<int>(x.size());
    g.s = s;
    g.scale = u.scale;
    g.omega = u.oscillation;
    Point c = x;
    if (!u.centre.empty())
        for (size_t i = 0; i < c.size(); ++i) c[i] -= u.centre[i];
    g.centre = norm(c);
    g.singular = u.singular_distance;
    g.q = env.B > 0.0 ? 2.0 * s - env.beta : 2.0 * s;
    if (g.singular == 0.0) throw DomainError("u is not C^2 at x; use classify_definiteness for this point");
    const int N = g.N;
    const double C = normalizing_constant(N, s);
    FracLapResult out;

    auto S = [&](double rho) {
        return sphere_sum(
            N,
            [&](const Point& w) {
                Point z = w;
                for (auto& c : z) c *= rho;
                return u.second_difference(x, z);
            },
            true);
    };
    const double ux = u.value(x);
    auto T = [&](double rho) {
        return sphere_sum(
            N,
            [&](const Point& w) {
                Point a = x, b = x;
                for (size_t i = 0; i < a.size(); ++i) {
                    a[i] += rho * w[i];
                    b[i] -= rho * w[i];
                }
                return u.value(a) + u.value(b);
            },
            true);
    };
    const double K = 2.0 * sphere_area(N) * ux;

    double r = std::min(1.0, g.scale);
    if (g.omega > 0.0) r = std::min(r, 0.5 / g.omega);
    if (std::isfinite(g.singular)) r = std::min(r, 0.5 * g.singular);
    out.split_radius = r;

    // near part: rho = r v^{1/(2-2s)}, rho^{-1-2s} S d rho = r^{2-2s}/(2-2s) S/rho^2 dv
    const double p = 1.0 / (2.0 - 2.0 * s);
    auto near = [&](double v) {
        if (v <= 0.0) return 0.0;
        double rho = r * std::pow(v, p);
        return S(rho) / (rho * rho);
    };
    IntegralResult in = adaptive(near, {0.0, 0.25, 1.0}, cfg);
    const double near_pref = std::pow(r, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    IntegralResult tail = radial_integral(S, T, K, r, g, cfg);

    out.near_part = 0.5 * C * near_pref * in.value;
    out.tail_part = 0.5 * C * tail.value;
    out.value = out.near_part + out.tail_part;
    out.error_estimate = 0.5 * C * (near_pref * in.error_estimate + tail.error_estimate) +
                         4.0 * std::numeric_limits<double>::epsilon() * 0.5 * C *
                             (near_pref * in.abs_value + tail.abs_value);
    return out;
}

static FieldView view_of(const FunctionSpec& u, const Point& x) {
    FieldView v;
    v.value = [&u](const Point& y) { return u.value(y); };
    v.second_difference = [&u](const Point& y, const Point& z) { return u.second_difference(y, z); };
    v.envelope = u.effective_envelope();
    v.scale = u.feature_scale();
    v.oscillation = u.oscillation();
    v.centre = u.offset();
    v.singular_distance = u.singular_distance(x);
    return v;
}

FracLapResult frac_laplacian(const FunctionSpec& u, const Point& x, double s, const QuadratureConfig& cfg) {
    cfg.validate();
    check_inputs(u, x, s);
    FieldView v = view_of(u, x);
    if (u.affine_like()) {
        if (v.envelope.B > 0.0 && v.envelope.beta >= 2.0 * s)
            throw DomainError("growth exponent " + std::to_string(v.envelope.beta) +
                              " >= 2s: (-Delta)^s u is not defined by the second-difference integral");
        FracLapResult out;
        out.split_radius = std::min(1.0, v.scale);
        return out;
    }
    return frac_laplacian(v, x, s, cfg);
}

std::vector<double> frac_laplacian_pv(const FunctionSpec& u, const Point& x, double s,
                                      const std::vector<double>& epsilons, const QuadratureConfig& cfg) {
    cfg.validate();
    check_inputs(u, x, s);
    for (size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0)) throw DomainError("frac_laplacian_pv: epsilons must be positive");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw DomainError("frac_laplacian_pv: epsilons must decrease");
    }
    GrowthEnvelope env = u.effective_envelope();
    if (env.B > 0.0 && env.beta >= 2.0 * s)
        throw IndefiniteError("|u(x)-u(y)| |x-y|^{-N-2s} is not integrable outside B_eps(x): growth exponent " +
                              std::to_string(env.beta) + " >= 2s");
    const Geometry g = geometry(u, x, s);
    const int N = g.N;
    const double C = normalizing_constant(N, s);
    const double ux = u.value(x);
    auto shifted = [&](double rho, const Point& w) {
        Point y = x;
        for (size_t i = 0; i < y.size(); ++i) y[i] += rho * w[i];
        return u.value(y);
    };
    auto P = [&](double rho) {
        return sphere_sum(N, [&](const Point& w) { return ux - shifted(rho, w); }, false);
    };
    auto T = [&](double rho) { return sphere_sum(N, [&](const Point& w) { return shifted(rho, w); }, false); };
    const double K = sphere_area(N) * ux;

    std::vector<double> out;
    out.reserve(epsilons.size());
    for (double eps : epsilons) {
        IntegralResult r = radial_integral(P, T, K, eps, g, cfg);
        out.push_back(C * r.value);
    }
    return out;
}

double extrapolate_pv_limit(const std::vector<double>& eps, const std::vector<double>& vals, double s) {
    if (eps.size() != vals.size() || eps.empty()) throw DomainError("extrapolate_pv_limit: size mismatch");
    const size_t m = std::min<size_t>(3, eps.size());
    const size_t off = eps.size() - m;
    // vals = L + sum_k a_k eps^{2k - 2s}, solved on the last m points
    std::vector<std::vector<double>> A(m, std::vector<double>(m + 1));
    for (size_t i = 0; i < m; ++i) {
        A[i][0] = 1.0;
        for (size_t k = 1; k < m; ++k) A[i][k] = std::pow(eps[off + i], 2.0 * k - 2.0 * s);
        A[i][m] = vals[off + i];
    }
    for (size_t c = 0; c < m; ++c) {
        size_t piv = c;
        for (size_t r = c + 1; r < m; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        for (size_t r = 0; r < m; ++r) {
            if (r == c) continue;
            double f = A[r][c] / A[c][c];
            for (size_t k = c; k <= m; ++k) A[r][k] -= f * A[c][k];
        }
    }
    return A[0][m] / A[0][0];
}

const char* to_string(Definiteness d) {
    switch (d) {
        case Definiteness::ConvergesEverywhere: return "ConvergesEverywhere";
        case Definiteness::IdenticallyZero: return "IdenticallyZero";
        case Definiteness::NegInfinite: return "NegInfinite";
        case Definiteness::Indefinite: return "Indefinite";
    }
    return "?";
}

DefinitenessResult classify_definiteness(const FunctionSpec& u, double s, const std::optional<Point>& x) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("s must lie in (0,1)");
    if (x) u.check_point(*x);
    using D = Definiteness;
    if (u.constant_like()) return {D::IdenticallyZero, std::nullopt, "constant"};
    if (u.affine_like()) {
        if (s <= 0.5) return {D::Indefinite, std::nullopt, "non-constant affine, s <= 1/2: both half-spaces diverge"};
        return {D::IdenticallyZero, std::nullopt, "non-constant affine, s > 1/2: odd integrand, absolutely summable"};
    }
    const FunctionSpec* base = &u;
    if (u.family() == Family::Ruled) base = u.profile();
    if (!u.convex())
        throw ClassificationUnsupported(std::string("classification needs affine or convex data, got ") +
                                        u.to_string());
    if (base->family() == Family::PiecewiseLinear1d) {
        const double lambda = base->params()[0];
        if (s <= 0.5) {
            // u(x) - u(y) ~ -|y| as y -> +inf; as y -> -inf it is ~ lambda |y|
            if (lambda <= 0.0)
                return {D::NegInfinite, x, "piecewise linear, s <= 1/2, lambda <= 0: u(x)-u(y) <= C near infinity"};
            return {D::Indefinite, std::nullopt, "piecewise linear, s <= 1/2, 0 < lambda < 1: both tails diverge"};
        }
        // s > 1/2: linear growth is summable, the kink is not
        Point kink_at;
        if (u.family() == Family::Ruled) {
            if (!x) return {D::NegInfinite, std::nullopt, "ruled piecewise linear, s > 1/2: -inf on the kink line"};
            if (u.singular_distance(*x) == 0.0) return {D::NegInfinite, x, "on the kink line, |y|^{-2s} not summable"};
            return {D::ConvergesEverywhere, std::nullopt, "off the kink line"};
        }
        kink_at = u.offset().empty() ? Point{0.0} : u.offset();
        if (!x) return {D::NegInfinite, kink_at, "piecewise linear, s > 1/2: -inf only at the kink"};
        if (u.singular_distance(*x) == 0.0) return {D::NegInfinite, x, "at the kink, |y|^{-2s} not summable"};
        return {D::ConvergesEverywhere, std::nullopt, "away from the kink"};
    }
    // smooth convex non-affine data growing in every direction of its profile
    const GrowthEnvelope env = u.effective_envelope();
    if (s <= 0.5) return {D::NegInfinite, x, "convex non-affine, s <= 1/2: growth at least linear, u(x)-u(y) bounded above"};
    if (env.beta < 2.0 * s) return {D::ConvergesEverywhere, std::nullopt, "convex, growth exponent below 2s"};
    return {D::NegInfinite, x, "convex, growth exponent >= 2s: tail of v(y)|x-y|^{-N-2s} diverges"};
}

TailBoundConstants second_difference_tail_constants(const FunctionSpec& u) {
    auto dec = u.hessian_decay();
    if (!dec) throw DomainError("second_difference_tail_bound: no hessian decay declared for " + u.to_string());
    const double C = dec->C, alpha = dec->alpha;
    if (!(alpha > 0.0)) throw DomainError("second_difference_tail_bound: alpha must be > 0");
    const double e = 2.0 - alpha;
    GrowthEnvelope env = u.effective_envelope();
    double A = 0.0, B = 0.0;
    if (env.B == 0.0 || env.beta == e) {
        A = env.A;
        B = env.B;
    } else if (env.beta < e && e > 0.0) {
        // |x|^beta <= 1 + |x|^{2-alpha}
        A = env.A + env.B;
        B = env.B;
    } else if (alpha < 1.0) {
        // integrate the hessian bound twice from the origin
        const int d = u.dimension() == 0 ? 1 : u.dimension();
        Point o(d, 0.0);
        double u0 = std::abs(u.value(o)), g0 = norm(u.gradient(o));
        A = u0 + g0;
        B = g0 + C / ((1.0 - alpha) * (2.0 - alpha));
    } else {
        throw DomainError("second_difference_tail_bound: envelope exponent exceeds 2 - alpha");
    }
    TailBoundConstants k;
    k.alpha = alpha;
    k.A1 = 4.0 * A;
    k.B1 = std::max(C, 4.0 * B * std::pow(e >= 0.0 ? 3.0 : 2.0, e));
    return k;
}

double second_difference_tail_bound(const FunctionSpec& u, double z) {
    if (!(z > 0.0)) throw DomainError("second_difference_tail_bound: |z| must be > 0");
    TailBoundConstants k = second_difference_tail_constants(u);
    return k.A1 + k.B1 * std::pow(z, 2.0 - k.alpha);
}

VerificationReport vanish_at_infinity_check(const FunctionSpec& u, double s, const std::vector<double>& radii, int N,
                                            double rel_tolerance, const QuadratureConfig& cfg) {
    VerificationReport rep;
    rep.suite = "vanish_at_infinity";
    if (radii.empty()) return rep;
    if (u.dimension() != 0) N = u.dimension();
    std::vector<double> mags;
    double err_last = 0.0;
    for (double R : radii) {
        Point x(N, 0.0);
        x[0] = R;
        FracLapResult r = frac_laplacian(u, x, s, cfg);
        mags.push_back(std::abs(r.value));
        err_last = r.error_estimate;
        rep.add({"value_at_radius", r.value, 0.0, r.error_estimate, true, x, ""});
    }
    bool mono = true;
    double worst = 0.0;
    for (size_t i = 2; i < mags.size(); ++i) {
        double grow = mags[i] - mags[i - 1];
        worst = std::max(worst, grow);
        if (grow > err_last) mono = false;
    }
    rep.add({"monotone_decay", worst, 0.0, err_last, mono, {}, "magnitude non-increasing from the second radius"});
    double ratio = mags.front() > 0.0 ? mags.back() / mags.front() : std::numeric_limits<double>::infinity();
    rep.add({"last_over_first", ratio, rel_tolerance, 0.0, ratio < rel_tolerance, {radii.back()}, ""});
    return rep;
}

}  // namespace fracheat
