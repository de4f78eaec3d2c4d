#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "levyflow/semigroup.hpp"

namespace levyflow {

/// c + a·sin(ξy + φ).
struct FarField {
    double constant = 0.0;
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;

    double operator()(double y) const { return constant + amplitude * std::sin(frequency * y + phase); }
};

/// Bounded function on the line that coincides with `left` for y < −radius
/// and with `right` for y > radius. `breaks` lists its non-smooth points.
struct LineProfile {
    std::function<double(double)> value;
    std::vector<double> breaks;
    double radius = 0.0;
    FarField left;
    FarField right;
};

/// One-dimensional test functions as line profiles. Throws InvalidParameter
/// for unbounded functions.
LineProfile line_profile(const TestFunction& f);

/// Normalisation Γ((d+1)/2)/π^{(d+1)/2} of the Poisson kernel.
double poisson_constant(int dim);
/// p_θ(r) = c_d θ (θ² + r²)^{−(d+1)/2}.
double poisson_kernel(int dim, double theta, double r);
/// ∂_θ p_θ(r) = c_d (r² − dθ²)(θ² + r²)^{−(d+3)/2}.
double poisson_kernel_dtheta(int dim, double theta, double r);
/// ∫ p_θ by radial quadrature; equals 1 up to the quadrature error.
double poisson_kernel_mass(int dim, double theta);

/// P_θ f(x) on the line. The region |y| ≤ radius + |x| + 1 is integrated by
/// tanh-sinh split at the breaks and at dyadic multiples of θ; beyond it the
/// far fields are integrated exactly (constants) or by Fourier quadrature.
double poisson_integral(const LineProfile& f, double theta, double x);
/// ∂_θ P_θ f(x) against the closed-form kernel derivative.
double poisson_theta_derivative(const LineProfile& f, double theta, double x);

/// P_θ f(x) and ∂_θ P_θ f(x) in dimension 1 or 2. In dimension 2 f must be
/// eventually constant (capped powers, bumps, constants); the whole plane is
/// mapped onto a finite polar domain.
double poisson_integral(const TestFunction& f, int dim, double theta, std::span<const double> x);
double poisson_theta_derivative(const TestFunction& f, int dim, double theta, std::span<const double> x);

/// ∫ (f(y) − f(x)) g(y) ∂_θ p_θ(x − y) dy, which equals
/// ∂_θP_θ(fg)(x) − f(x)∂_θP_θ g(x) without the cancellation.
double commutator(const LineProfile& f, const LineProfile& g, double theta, double x);

struct ThetaPoint {
    double theta = 0.0;
    double sup = 0.0;    ///< max over the x-grid
    double scaled = 0.0; ///< θ^{1−β}·sup for the seminorm, sup otherwise
};

struct SeminormEstimate {
    double seminorm = 0.0; ///< max over θ of θ^{1−β}‖∂_θP_θ f‖∞
    double slope = 0.0;    ///< log-log slope of ‖∂_θP_θ f‖∞ over θ ≤ small_theta
    double intercept = 0.0;
    bool consistent = true; ///< slope ≥ β − 1 − tolerance
    std::vector<ThetaPoint> points;
};

/// Grid estimate of sup_θ θ^{1−β}‖∂_θP_θ f‖∞ together with the small-θ
/// slope; a slope below β − 1 − slope_tolerance flags f as not β-Hölder.
/// Throws InsufficientDecades unless the θ grid spans four decades.
SeminormEstimate holder_seminorm_estimate(const LineProfile& f, double beta, std::span<const double> theta_grid,
                                          std::span<const double> x_grid, double small_theta = 0.1,
                                          double slope_tolerance = 0.1);

struct CommutatorScaling {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<ThetaPoint> points;
};

/// Log-log slope of max_x |commutator(f, g, θ, x)| against θ.
CommutatorScaling commutator_scaling(const LineProfile& f, const LineProfile& g,
                                     std::span<const double> theta_grid, std::span<const double> x_grid);

} // namespace levyflow
