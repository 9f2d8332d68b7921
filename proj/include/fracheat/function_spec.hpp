#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fracheat/kernel.hpp"

namespace fracheat {

// |u(x)| <= A + B |x|^beta.  beta = 0 together with B = 0 marks a bounded
// function.  upper_only: only u <= A + B|x|^beta is asserted (convex data).
struct GrowthEnvelope {
    double A = 0.0;
    double B = 0.0;
    double beta = 0.0;
    bool upper_only = false;

    double sigma(double s) const { return 2.0 * s - beta; }
    double operator()(double r) const { return A + (B == 0.0 ? 0.0 : B * std::pow(r, beta)); }
    void validate() const;
};

// |D^2 u(x)| <= C |x|^{-alpha}
struct HessianDecay {
    double C = 0.0;
    double alpha = 0.0;
};

enum class Family { Constant, Affine, Quadratic, Cosine, Gaussian, AbsPower, PiecewiseLinear1d, Ruled };

const char* to_string(Family f);

// Analytic test function with exact value, gradient and Hessian.
//
// String form, parsed by FunctionSpec::parse:
//   constant:c            affine:a,xi1[,xi2,..]    quadratic:c
//   cosine:xi1[,xi2,..]   gaussian:a               abs_power:beta
//   piecewise_linear_1d:lambda                     ruled:n1,n2/<profile>
// and an optional translation suffix "@h1[,h2,..]", meaning u(x - h).
class FunctionSpec {
public:
    static FunctionSpec constant(double c);
    static FunctionSpec affine(double a, Point xi);
    // c |x|^2
    static FunctionSpec quadratic(double c);
    // cos(xi . x)
    static FunctionSpec cosine(Point xi);
    // exp(-a |x|^2)
    static FunctionSpec gaussian(double a = 1.0);
    // (1 + |x|^2)^{beta/2}
    static FunctionSpec abs_power(double beta);
    // x for x >= 0, lambda x for x < 0
    static FunctionSpec piecewise_linear_1d(double lambda);
    // h(n . x) in two dimensions, constant along the direction orthogonal to n
    static FunctionSpec ruled(Point normal, const FunctionSpec& profile);

    static FunctionSpec parse(const std::string& text);
    std::string to_string() const;

    FunctionSpec translated(const Point& h) const;
    FunctionSpec with_envelope(const GrowthEnvelope& env) const;

    Family family() const { return family_; }
    const std::vector<double>& params() const { return params_; }
    const Point& offset() const { return offset_; }
    const FunctionSpec* profile() const { return profile_.get(); }

    // 0 when any dimension is accepted
    int dimension() const;
    void check_point(const Point& x) const;

    double value(const Point& x) const;
    std::vector<double> gradient(const Point& x) const;
    std::vector<double> hessian(const Point& x) const;
    // 2u(x) - u(x+z) - u(x-z), evaluated without cancellation where the
    // family allows it
    double second_difference(const Point& x, const Point& z) const;

    const GrowthEnvelope& envelope() const { return envelope_; }
    // two-sided envelope; for convex data declared with an upper bound only,
    // the lower bound comes from the supporting plane at the origin
    GrowthEnvelope effective_envelope() const;
    std::optional<HessianDecay> hessian_decay() const;

    bool convex() const;
    bool affine_like() const;
    bool constant_like() const;
    bool bounded() const { return effective_envelope().B == 0.0; }
    // sup |xi| of the Fourier support for trigonometric data, else 0
    double oscillation() const;
    // length scale of the data around its centre
    double feature_scale() const;
    // distance from x to the set where u is not C^2 (the kink of
    // piecewise_linear_1d data); infinity for smooth families
    double singular_distance(const Point& x) const;

    // sampled checks of the declared metadata (envelope bound, convexity)
    VerificationReport check_metadata(int samples = 200, unsigned seed = 7) const;

private:
    FunctionSpec() = default;
    double value_local(const Point& y) const;
    void gradient_local(const Point& y, std::vector<double>& g) const;
    void hessian_local(const Point& y, std::vector<double>& h) const;
    Point shift(const Point& x) const;

    Family family_ = Family::Constant;
    std::vector<double> params_;
    Point offset_;
    std::shared_ptr<const FunctionSpec> profile_;
    GrowthEnvelope envelope_;
};

}  // namespace fracheat
