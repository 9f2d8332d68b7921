#include <algorithm>
#include <cmath>

#include "fracheat/kernel.hpp"

namespace fracheat {

namespace {

std::vector<double> tail_coefficients(int N, double s, double r_ref) {
    std::vector<double> c;
    const double l2 = std::log(2.0);
    double first = 0.0;
    for (int k = 1; k < 400; ++k) {
        double M = (N / 2.0 + 2.0 * s * k) * l2 + std::lgamma((N + 2.0 * s * k) / 2.0) + std::lgamma(1.0 + s * k) -
                   std::lgamma(k + 1.0);
        double coef = std::exp(M) / M_PI * std::sin(M_PI * s * k) * (k % 2 ? 1.0 : -1.0);
        double mag = std::exp(M - (N + 2.0 * s * k) * std::log(r_ref)) / M_PI;
        if (k == 1) first = mag;
        c.push_back(coef);
        if (mag < 1e-17 * first) break;
    }
    return c;
}

}  // namespace

RadialProfileTable::RadialProfileTable(const KernelParams& params, double r_min, double r_max, int nodes_per_decade)
    : params_(params) {
    params_.validate();
    if (!(r_min > 0.0 && r_max > r_min) || nodes_per_decade < 2)
        throw DomainError("RadialProfileTable: invalid node layout");
    const int N = params_.N;
    const double s = params_.s;
    const double lmin = std::log(r_min), lmax = std::log(r_max);
    const int n = static_cast<int>(std::ceil((lmax - lmin) / std::log(10.0) * nodes_per_decade)) + 1;
    nodes_.push_back(0.0);
    for (int i = 0; i < n; ++i) {
        double lr = lmin + (lmax - lmin) * i / (n - 1);
        logr_.push_back(lr);
        nodes_.push_back(std::exp(lr));
    }
    const KernelParams p2 = params_.shifted(2), p4 = params_.shifted(4), p6 = params_.shifted(6);
    // derivatives of g = log F in y = log r from D F_M = -r F_{M+2}
    auto push = [](double r, double a, double b, double c, std::vector<double>& lf, std::vector<double>& d1,
                   std::vector<double>& d2) {
        double r2 = r * r, q = r2 * b / a;
        lf.push_back(std::log(a));
        d1.push_back(-q);
        d2.push_back(-2.0 * q + r2 * r2 * c / a - q * q);
    };
    for (int i = 0; i < n; ++i) {
        double r = nodes_[i + 1];
        double a = f_radial(params_, r), b = f_radial(p2, r), c = f_radial(p4, r), d = f_radial(p6, r);
        f0_.push_back(a);
        push(r, a, b, c, lf0_, slope0_, curv0_);
        push(r, b, c, d, lf2_, slope2_, curv2_);
    }
    origin0_ = f_radial_origin(N, s);
    origin2_ = f_radial_origin(N + 2, s);
    f0_.insert(f0_.begin(), origin0_);
    tail0_ = tail_coefficients(N, s, r_max);
    tail2_ = tail_coefficients(N + 2, s, r_max);
    for (int i = 0; i + 1 < n; i += 4) {
        double rm = std::exp(0.5 * (logr_[i] + logr_[i + 1]));
        double exact = f_radial(params_, rm);
        interp_err_ = std::max(interp_err_, std::abs(f(rm) - exact) / exact);
    }
}

double RadialProfileTable::tail(int which, double r) const {
    const auto& c = which == 0 ? tail0_ : tail2_;
    const int N = params_.N + 2 * which;
    const double s = params_.s;
    double x = std::pow(r, -2.0 * s), xk = x, sum = 0.0;
    for (double ck : c) {
        sum += ck * xk;
        xk *= x;
    }
    return sum * std::pow(r, -static_cast<double>(N));
}

double RadialProfileTable::eval(int which, double r) const {
    const double lr = std::log(r);
    if (r == 0.0) return which == 0 ? origin0_ : origin2_;
    if (lr < logr_.front()) return f_radial(params_.shifted(2 * which), r);
    if (lr >= logr_.back()) return tail(which, r);
    const double h = (logr_.back() - logr_.front()) / (logr_.size() - 1);
    size_t i = std::min(static_cast<size_t>((lr - logr_.front()) / h), logr_.size() - 2);
    const auto& g = which == 0 ? lf0_ : lf2_;
    const auto& d1 = which == 0 ? slope0_ : slope2_;
    const auto& d2 = which == 0 ? curv0_ : curv2_;
    // quintic Hermite on [y_i, y_{i+1}]
    double u = (lr - logr_[i]) / h;
    double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
    double H0 = 1 - 10 * u3 + 15 * u4 - 6 * u5, H1 = u - 6 * u3 + 8 * u4 - 3 * u5;
    double H2 = 0.5 * (u2 - 3 * u3 + 3 * u4 - u5), H3 = 10 * u3 - 15 * u4 + 6 * u5;
    double H4 = -4 * u3 + 7 * u4 - 3 * u5, H5 = 0.5 * (u3 - 2 * u4 + u5);
    return std::exp(g[i] * H0 + h * d1[i] * H1 + h * h * d2[i] * H2 + g[i + 1] * H3 + h * d1[i + 1] * H4 +
                    h * h * d2[i + 1] * H5);
}

}  // namespace fracheat
