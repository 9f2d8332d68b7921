#include "fracheat/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

namespace fracheat {

void QuadratureConfig::validate() const {
    if (!(abs_tol >= 0.0) || !(rel_tol >= 0.0) || abs_tol + rel_tol <= 0.0)
        throw DomainError("quadrature tolerances must be non-negative with positive sum");
    if (max_subdivisions < 1) throw DomainError("max_subdivisions must be >= 1");
    if (!(tail_cut_epsilon > 0.0 && tail_cut_epsilon < 1.0))
        throw DomainError("tail_cut_epsilon must lie in (0,1)");
}

double gamma(double x) {
    if (x <= 0.0 && x == std::floor(x)) throw DomainError("gamma: pole at non-positive integer");
    return std::tgamma(x);
}

double log_gamma(double x) {
    if (x <= 0.0 && x == std::floor(x)) throw DomainError("log_gamma: pole at non-positive integer");
    return std::lgamma(x);
}

double bessel_j(double nu, double z) {
    if (nu < -0.5) throw DomainError("bessel_j: order below -1/2");
    if (z < 0.0) throw DomainError("bessel_j: negative argument");
    if (z == 0.0) return nu == 0.0 ? 1.0 : (nu > 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    // half-integer orders are elementary; the generic path is much slower
    if (nu == -0.5) return std::sqrt(2.0 / (M_PI * z)) * std::cos(z);
    if (nu == 0.5) return std::sqrt(2.0 / (M_PI * z)) * std::sin(z);
    return boost::math::cyl_bessel_j(nu, z);
}

double check_bessel_recurrence(double nu, double z) {
    if (!(z > 0.0)) throw DomainError("check_bessel_recurrence: z must be positive");
    double h = 1e-3 * std::max(1.0, std::sqrt(z));
    h = std::min(h, z / 4.0);
    auto J = [nu](double x) { return bessel_j(nu, x); };
    double d = (-J(z + 2 * h) + 8 * J(z + h) - 8 * J(z - h) + J(z - 2 * h)) / (12 * h);
    return std::abs(z * d - nu * J(z) + z * bessel_j(nu + 1.0, z));
}

namespace {

struct Panel {
    double a, b, value, error, abs_value;
    bool operator<(const Panel& o) const { return error < o.error; }
};

struct GK21 {
    std::array<double, 11> x, wk;
    std::array<double, 5> wg;
    GK21() {
        using boost::math::quadrature::gauss;
        using boost::math::quadrature::gauss_kronrod;
        const auto& ax = gauss_kronrod<double, 21>::abscissa();
        const auto& w = gauss_kronrod<double, 21>::weights();
        const auto& gw = gauss<double, 10>::weights();
        std::copy(ax.begin(), ax.end(), x.begin());
        std::copy(w.begin(), w.end(), wk.begin());
        std::copy(gw.begin(), gw.end(), wg.begin());
    }
};

const GK21& rule() {
    static const GK21 r;
    return r;
}

Panel apply_rule(const Integrand& f, double a, double b) {
    const GK21& r = rule();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::array<double, 21> fv;
    fv[0] = f(c);
    for (int i = 1; i <= 10; ++i) {
        fv[2 * i - 1] = f(c - h * r.x[i]);
        fv[2 * i] = f(c + h * r.x[i]);
    }
    double k = r.wk[0] * fv[0], g = 0.0, kabs = r.wk[0] * std::abs(fv[0]);
    for (int i = 1; i <= 10; ++i) {
        double pair = fv[2 * i - 1] + fv[2 * i];
        k += r.wk[i] * pair;
        kabs += r.wk[i] * (std::abs(fv[2 * i - 1]) + std::abs(fv[2 * i]));
        // odd Kronrod abscissae coincide with the Gauss nodes
        if (i % 2 == 1) g += r.wg[(i - 1) / 2] * pair;
    }
    double mean = 0.5 * k;
    double asc = r.wk[0] * std::abs(fv[0] - mean);
    for (int i = 1; i <= 10; ++i)
        asc += r.wk[i] * (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean));
    k *= h;
    g *= h;
    kabs *= std::abs(h);
    asc *= std::abs(h);
    double err = std::abs(k - g);
    if (asc > 0.0 && err > 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    err = std::max(err, 50.0 * eps * kabs);
    if (!std::isfinite(k)) err = std::numeric_limits<double>::infinity();
    return {a, b, k, err, kabs};
}

}  // namespace

IntegralResult integrate_adaptive(const Integrand& f, const std::vector<double>& breakpoints,
                                  const QuadratureConfig& cfg) {
    cfg.validate();
    if (breakpoints.size() < 2) throw DomainError("integrate_adaptive: need at least two breakpoints");
    std::priority_queue<Panel> heap;
    IntegralResult res;
    double value = 0.0, error = 0.0, absv = 0.0;
    for (size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (breakpoints[i + 1] == breakpoints[i]) continue;
        Panel p = apply_rule(f, breakpoints[i], breakpoints[i + 1]);
        res.evaluations += 21;
        value += p.value;
        error += p.error;
        absv += p.abs_value;
        heap.push(p);
    }
    int subdivisions = static_cast<int>(heap.size());
    auto target = [&] { return std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value)); };
    while (error > target() && !heap.empty()) {
        if (subdivisions >= cfg.max_subdivisions) {
            res.value = value;
            res.error_estimate = error;
            res.abs_value = absv;
            throw ConvergenceError("adaptive quadrature: subdivision budget exhausted", res);
        }
        Panel p = heap.top();
        heap.pop();
        double m = 0.5 * (p.a + p.b);
        if (m <= p.a || m >= p.b) {
            // interval cannot be split further in floating point; keep its error
            res.value = value;
            res.error_estimate = error;
            res.abs_value = absv;
            throw ConvergenceError("adaptive quadrature: interval collapsed", res);
        }
        Panel l = apply_rule(f, p.a, m), r = apply_rule(f, m, p.b);
        res.evaluations += 42;
        value += l.value + r.value - p.value;
        absv += l.abs_value + r.abs_value - p.abs_value;
        heap.push(l);
        heap.push(r);
        ++subdivisions;
        // recompute the error sum now and then to shed accumulated rounding
        if (subdivisions % 64 == 0) {
            error = 0.0;
            auto copy = heap;
            while (!copy.empty()) {
                error += copy.top().error;
                copy.pop();
            }
        } else {
            error += l.error + r.error - p.error;
        }
    }
    res.value = value;
    res.error_estimate = std::max(error, 0.0);
    res.abs_value = absv;
    return res;
}

IntegralResult integrate_adaptive(const Integrand& f, double a, double b, const QuadratureConfig& cfg) {
    return integrate_adaptive(f, std::vector<double>{a, b}, cfg);
}

double truncation_radius(const DecayEnvelope& env, double threshold) {
    if (!(env.two_s > 0.0)) throw DomainError("truncation_radius: decay exponent must be positive");
    if (!(threshold > 0.0)) throw DomainError("truncation_radius: threshold must be positive");
    auto log_env = [&](double r) { return env.power * std::log(r) - std::pow(r, env.two_s); };
    const double log_thr = std::log(threshold);
    // envelope peaks at rho^{2s} = power / (2s)
    double lo = env.power > 0.0 ? std::pow(env.power / env.two_s, 1.0 / env.two_s) : 0.0;
    lo = std::max(lo, 1e-300);
    double hi = std::max(1.0, 2.0 * lo);
    while (log_env(hi) >= log_thr) hi *= 2.0;
    if (log_env(lo) < log_thr) return lo;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
        double m = 0.5 * (lo + hi);
        (log_env(m) >= log_thr ? lo : hi) = m;
    }
    return hi;
}

IntegralResult integrate_semi_infinite(const Integrand& f, const DecayEnvelope& env,
                                       const QuadratureConfig& cfg, double oscillation) {
    cfg.validate();
    double thr = cfg.tail_cut_epsilon * (cfg.abs_tol > 0.0 ? cfg.abs_tol : cfg.rel_tol);
    double rmax = 2.0 * truncation_radius(env, thr);
    std::vector<double> br{0.0};
    if (oscillation > 0.0) {
        double step = M_PI / oscillation;
        long n = static_cast<long>(std::ceil(rmax / step));
        long cap = std::max(1, cfg.max_subdivisions / 2);
        if (n > cap) step = rmax / static_cast<double>(n = cap);
        for (long i = 1; i < n; ++i) br.push_back(step * static_cast<double>(i));
    } else {
        for (double x = 0.5; x < rmax; x *= 2.0) br.push_back(x);
    }
    br.push_back(rmax);
    IntegralResult res = integrate_adaptive(f, br, cfg);
    // bound for the discarded tail: int_R^inf rho^p e^{-rho^{2s}} <~ 2 env(R) R^{1-2s} / (2s)
    double tail = 2.0 * std::exp(env.power * std::log(rmax) - std::pow(rmax, env.two_s)) *
                  std::pow(rmax, 1.0 - env.two_s) / env.two_s;
    res.error_estimate += tail;
    return res;
}

IntegralResult integrate_oscillatory_tail(const Integrand& f, double a, double half_period,
                                          const QuadratureConfig& cfg, int max_blocks) {
    cfg.validate();
    if (!(half_period > 0.0)) throw DomainError("integrate_oscillatory_tail: half period must be positive");
    QuadratureConfig q = cfg;
    q.abs_tol = 1e-3 * cfg.abs_tol;
    q.rel_tol = std::max(1e-3 * cfg.rel_tol, 1e-10);
    IntegralResult res;
    std::vector<double> sums;
    double partial = 0.0, absv = 0.0;
    // eps[k] holds the current antidiagonal of the epsilon table
    std::vector<double> row;
    double best = 0.0, prev_best = std::numeric_limits<double>::quiet_NaN(), err = std::numeric_limits<double>::infinity();
    for (int n = 0; n < max_blocks; ++n) {
        double lo = a + n * half_period, hi = lo + half_period;
        IntegralResult b;
        try {
            b = integrate_adaptive(f, lo, hi, q);
        } catch (const ConvergenceError& e) {
            b = e.best();
        }
        res.evaluations += b.evaluations;
        partial += b.value;
        absv += b.abs_value;
        // Wynn epsilon: new antidiagonal from the previous one
        std::vector<double> next{partial};
        for (size_t k = 0; k < row.size(); ++k) {
            double diff = next[k] - row[k];
            double prev2 = k == 0 ? 0.0 : row[k - 1];
            if (diff == 0.0) break;
            next.push_back(prev2 + 1.0 / diff);
        }
        row = std::move(next);
        // even columns carry the estimates
        double est = row[(row.size() - 1) / 2 * 2];
        if (n >= 4) {
            double d = std::abs(est - best);
            if (std::isfinite(prev_best)) err = d + std::abs(best - prev_best);
            prev_best = best;
            best = est;
            if (err <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(best))) {
                res.value = best;
                res.error_estimate = err;
                res.abs_value = absv;
                return res;
            }
        } else {
            best = est;
        }
    }
    res.value = best;
    res.error_estimate = err;
    res.abs_value = absv;
    throw ConvergenceError("oscillatory tail: extrapolation did not settle", res);
}

}  // namespace fracheat
