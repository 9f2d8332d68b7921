#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "fracheat/solver.hpp"

namespace fracheat {

constexpr double kGeometricTolerance = 1e-6;

// [inf u0, sup u0] for bounded families; nullopt otherwise
std::optional<std::pair<double, double>> datum_range(const FunctionSpec& u0);

// sup u <= sup u0 + tol and inf u >= inf u0 - tol over every stored value;
// for non-constant data also checks that max_x u(x, t) decreases over t > 0.
VerificationReport max_principle_check(const SolutionField& field, const FunctionSpec& u0,
                                       double tolerance = kGeometricTolerance);

// Second differences u(x+y,t) + u(x-y,t) - 2u(x,t) read off the grid.  A
// pair (direction d, step h) is used only when y = h d is a whole number of
// grid spacings on every axis; x runs over nodes with x +- y inside the grid.
struct ConvexityReport {
    double min_second_difference = 0.0;
    Point worst_x, worst_y;
    double worst_t = 0.0;
    bool convex = false;  // min >= -tolerance over t > 0
    // min over t > 0 of the second differences with |y| = 1 (NaN if no such step)
    double strictness_margin = 0.0;
    std::vector<double> min_by_time;  // per grid time, including t = 0
    size_t triples = 0;
    VerificationReport report;
};

ConvexityReport convexity_check(const SolutionField& field, const std::vector<Point>& directions,
                                const std::vector<double>& steps, double tolerance = kGeometricTolerance);

// axes and diagonals (normalised) of R^N
std::vector<Point> axis_and_diagonal_directions(int N);

struct RuledReport {
    Point xi;
    double max_deviation = 0.0;  // max |2u(x) - u(x + mu xi) - u(x - mu xi)|
    Point worst_x;
    double worst_mu = 0.0, worst_t = 0.0;
    bool ruled = false;
    std::vector<double> max_by_time;
    VerificationReport report;
};

// mu runs over `mus` (default: 1..3 grid steps along xi when xi is grid aligned)
RuledReport ruled_check(const SolutionField& field, const Point& xi, std::vector<double> mus = {},
                        double tolerance = kGeometricTolerance);

// At every t > 0: either some axis/diagonal direction is a ruling, or the
// smallest second difference at |y| = 1 (nearest available step otherwise)
// exceeds the tolerance.
VerificationReport dichotomy_check(const SolutionField& field, double tolerance = kGeometricTolerance);

// u_t >= -tolerance at every (x, t); non-affine data must also give
// u_t >= strict_margin, and u_t within tolerance of 0 is flagged.
VerificationReport monotonicity_check(const FunctionSpec& u0, const std::vector<Point>& points,
                                      const std::vector<double>& times, const KernelParams& params,
                                      double tolerance = kGeometricTolerance, double strict_margin = 1e-4,
                                      int threads = 0);

// convexity, rulings and u_t >= 0 for the heat equation on (0, T)
VerificationReport classical_dichotomy_check(const FunctionSpec& u0, const GridSpec& grid,
                                             const ClassicalParams& params, double tolerance = kGeometricTolerance,
                                             int threads = 0);

}  // namespace fracheat
