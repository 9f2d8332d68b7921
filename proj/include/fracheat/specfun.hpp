#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracheat {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct IntegralResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
    // integral of |f|; the ratio abs_value/|value| measures cancellation
    double abs_value = 0.0;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, IntegralResult best)
        : std::runtime_error(what), best_(best) {}
    const IntegralResult& best() const noexcept { return best_; }

private:
    IntegralResult best_;
};

struct QuadratureConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 2048;
    // truncation of exp(-rho^{2s}) tails happens below tail_cut_epsilon * abs_tol
    double tail_cut_epsilon = 1e-2;

    void validate() const;
};

// rho^power * exp(-rho^two_s), the decay profile of a semi-infinite integrand
struct DecayEnvelope {
    double two_s = 1.0;
    double power = 0.0;
};

double gamma(double x);
double log_gamma(double x);

double bessel_j(double nu, double z);

// |z J'_nu(z) - nu J_nu(z) + z J_{nu+1}(z)| with J' from a finite-difference stencil
double check_bessel_recurrence(double nu, double z);

using Integrand = std::function<double(double)>;

// Global adaptive Gauss-Kronrod (21 points) starting from the panels given by
// the sorted breakpoints.  Throws ConvergenceError when the budget runs out.
IntegralResult integrate_adaptive(const Integrand& f, const std::vector<double>& breakpoints,
                                  const QuadratureConfig& cfg);

IntegralResult integrate_adaptive(const Integrand& f, double a, double b, const QuadratureConfig& cfg);

// Smallest rho with envelope(rho) < threshold, beyond the envelope maximum.
double truncation_radius(const DecayEnvelope& env, double threshold);

// Integral over (0, inf) of f, truncated where the envelope falls below
// tail_cut_epsilon * abs_tol (radius doubled).  A positive oscillation
// frequency w adds panel breaks every pi / w.
IntegralResult integrate_semi_infinite(const Integrand& f, const DecayEnvelope& env,
                                       const QuadratureConfig& cfg, double oscillation = 0.0);

// Integral over (a, inf) of an oscillating integrand with slowly decaying
// amplitude: integrate consecutive blocks of length half_period and
// extrapolate the partial sums with Wynn's epsilon algorithm.
IntegralResult integrate_oscillatory_tail(const Integrand& f, double a, double half_period,
                                          const QuadratureConfig& cfg, int max_blocks = 200);

}  // namespace fracheat
