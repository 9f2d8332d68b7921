#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracheat/function_spec.hpp"

namespace fracheat {

// C_{N,s} = 2^{2s} s Gamma(N/2 + s) / (pi^{N/2} Gamma(1 - s))
double normalizing_constant(int N, double s);

// surface area of the unit sphere in R^N
double sphere_area(int N);

// int over the unit sphere of R^N (N <= 3) of f, with the angular rule
// refined until two levels agree.  even: f(-w) = f(w), so only a hemisphere
// is sampled.
double sphere_integral(int N, const std::function<double(const Point&)>& f, bool even = false);

struct FracLapResult {
    double value = 0.0;
    double near_part = 0.0;
    double tail_part = 0.0;
    double split_radius = 0.0;
    double error_estimate = 0.0;
};

// A scalar field seen by the evaluator: values, second differences and the
// geometric hints that place quadrature breakpoints.
struct FieldView {
    std::function<double(const Point&)> value;
    // 2v(x) - v(x+z) - v(x-z)
    std::function<double(const Point& x, const Point& z)> second_difference;
    GrowthEnvelope envelope;  // two-sided
    double scale = 1.0;
    double oscillation = 0.0;
    Point centre;  // empty: origin
    // distance from the evaluation point to the non-smooth set
    double singular_distance = std::numeric_limits<double>::infinity();
};

// (C_{N,s}/2) int [2u(x) - u(x+z) - u(x-z)] |z|^{-N-2s} dz for N <= 3.
// The ball |z| < split_radius is integrated after the substitution
// rho = r v^{1/(2-2s)}, which turns the rho^{1-2s} weight into a constant;
// the exterior is integrated directly up to a few feature lengths and then
// mapped to a bounded interval (or summed over half periods with epsilon
// extrapolation for oscillating data).
FracLapResult frac_laplacian(const FunctionSpec& u, const Point& x, double s, const QuadratureConfig& cfg = {});
FracLapResult frac_laplacian(const FieldView& u, const Point& x, double s, const QuadratureConfig& cfg = {});

// C_{N,s} int_{|y-x| > eps} [u(x) - u(y)] |x-y|^{-N-2s} dy for each eps,
// integrating the one-sided difference over the whole sphere.
std::vector<double> frac_laplacian_pv(const FunctionSpec& u, const Point& x, double s,
                                      const std::vector<double>& epsilons, const QuadratureConfig& cfg = {});

// Richardson extrapolation of PV values to eps -> 0; for C^2 data the
// truncation error is c eps^{2-2s} + O(eps^{4-2s}).
double extrapolate_pv_limit(const std::vector<double>& epsilons, const std::vector<double>& values, double s);

// the PV integral is not absolutely convergent outside B_eps(x)
class IndefiniteError : public DomainError {
public:
    using DomainError::DomainError;
};

class ClassificationUnsupported : public DomainError {
public:
    using DomainError::DomainError;
};

enum class Definiteness { ConvergesEverywhere, IdenticallyZero, NegInfinite, Indefinite };

const char* to_string(Definiteness d);

struct DefinitenessResult {
    Definiteness kind = Definiteness::ConvergesEverywhere;
    // set for NegInfinite when the blow-up happens at isolated points
    std::optional<Point> at;
    std::string reason;
};

// Symbolic classification for affine, piecewise_linear_1d and convex data.
// Without x the answer covers every point; with x it is the verdict there.
DefinitenessResult classify_definiteness(const FunctionSpec& u, double s, const std::optional<Point>& x = std::nullopt);

// A1 + B1 |z|^{2-alpha} bounding |2u(x) - u(x+z) - u(x-z)| uniformly in x,
// with A1 = 4A, B1 = max{C, 4 B 3^{2-alpha}} from the hessian decay (C, alpha)
// and an envelope |u| <= A + B|x|^{2-alpha}.
double second_difference_tail_bound(const FunctionSpec& u, double z);

struct TailBoundConstants {
    double A1 = 0.0, B1 = 0.0, alpha = 0.0;
};
TailBoundConstants second_difference_tail_constants(const FunctionSpec& u);

// Evaluates (-Delta)^s u at |x| = radius along e_1.  Checks that the
// magnitude decays monotonically from the second radius on and that at the
// last radius it is below rel_tolerance times its value at the first.
VerificationReport vanish_at_infinity_check(const FunctionSpec& u, double s, const std::vector<double>& radii,
                                            int N = 1, double rel_tolerance = 0.1, const QuadratureConfig& cfg = {});

}  // namespace fracheat
