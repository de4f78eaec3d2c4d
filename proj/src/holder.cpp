#include "levyflow/holder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "levyflow/errors.hpp"
#include "levyflow/levy_model.hpp"
#include "levyflow/parallel.hpp"
#include "levyflow/quadrature.hpp"
#include "levyflow/stats.hpp"

namespace levyflow {

namespace {

constexpr double kPi = std::numbers::pi;

enum class Kernel { Density, ThetaDerivative };

double line_kernel(Kernel k, double theta, double u) {
    return k == Kernel::Density ? poisson_kernel(1, theta, u) : poisson_kernel_dtheta(1, theta, u);
}

// ∫_R^∞ K(u) du in closed form.
double kernel_tail_mass(Kernel k, double theta, double r) {
    if (k == Kernel::Density) return 0.5 - std::atan(r / theta) / kPi;
    return r / (kPi * (theta * theta + r * r));
}

// ∫_0^∞ sin(A + ξv) K(R + v) dv.
double trig_tail(Kernel k, double theta, double r, double a, double xi) {
    const auto shifted = [&](double v) { return line_kernel(k, theta, r + v); };
    if (xi == 0.0) return std::sin(a) * kernel_tail_mass(k, theta, r);
    const double w = std::abs(xi);
    const double c = fourier_integral(shifted, w, false);
    const double s = fourier_integral(shifted, w, true);
    return std::sin(a) * c + std::copysign(1.0, xi) * std::cos(a) * s;
}

// ∫_R^∞ F(x ± u) K(u) du for a far field F.
double far_contribution(Kernel k, const FarField& far, double theta, double x, double r, double sign) {
    double out = far.constant * kernel_tail_mass(k, theta, r);
    if (far.amplitude != 0.0) {
        const double a = far.frequency * (x + sign * r) + far.phase;
        out += far.amplitude * trig_tail(k, theta, r, a, sign * far.frequency);
    }
    return out;
}

double line_integral(Kernel k, const LineProfile& f, double theta, double x) {
    require(theta > 0.0, "Poisson parameter must be positive");
    const double r = std::max(f.radius + std::abs(x), 1.0) + 1.0;
    std::vector<double> breaks{0.0};
    for (double b : f.breaks) breaks.push_back(b - x);
    for (double s = theta; s < r; s *= 4.0) {
        breaks.push_back(s);
        breaks.push_back(-s);
    }
    const double core = integrate_cusped([&](double u) { return f.value(x + u) * line_kernel(k, theta, u); }, -r, r,
                                         breaks, 1e-13, 1e-12);
    return core + far_contribution(k, f.right, theta, x, r, 1.0) + far_contribution(k, f.left, theta, x, r, -1.0);
}

// Far field of (f − fx)·g when at most one factor oscillates.
FarField product(FarField f, double fx, const FarField& g) {
    f.constant -= fx;
    if (f.amplitude == 0.0) return {f.constant * g.constant, f.constant * g.amplitude, g.frequency, g.phase};
    if (g.amplitude == 0.0) return {f.constant * g.constant, g.constant * f.amplitude, f.frequency, f.phase};
    throw UnsupportedModel("commutator of two oscillating far fields");
}

// Radius beyond which f is constant, and that constant, for plane integrals.
struct EventualConstant {
    double radius;
    double value;
};

EventualConstant eventual_constant(const TestFunction& f, std::span<const double> x) {
    auto dist = [&](const std::vector<double>& c) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double u = x[i] - (i < c.size() ? c[i] : 0.0);
            s += u * u;
        }
        return std::sqrt(s);
    };
    const double sc = f.scale();
    if (const auto* c = std::get_if<Constant>(&f.kind())) return {0.0, sc * c->value};
    if (const auto* c = std::get_if<CappedPower>(&f.kind())) {
        if (c->axis_dim == 0) return {dist(c->center) + 1.0, sc};
    }
    if (const auto* g = std::get_if<GaussianBump>(&f.kind())) return {dist(g->center) + 40.0 * g->width, 0.0};
    throw UnsupportedModel("plane Poisson integrals need an eventually constant radial test function");
}

double plane_integral(Kernel k, const TestFunction& f, double theta, std::span<const double> x) {
    require(theta > 0.0, "Poisson parameter must be positive");
    const EventualConstant ec = eventual_constant(f, x);
    // r = θ tan ψ maps the plane onto ψ ∈ [0, π/2); beyond ψ_far the
    // integrand is the constant far value and integrates in closed form.
    const double psi_far = std::atan(ec.radius / theta);
    const double c2 = poisson_constant(2);
    auto radial_weight = [&](double psi) {
        const double s = std::sin(psi), c = std::cos(psi);
        return k == Kernel::Density ? c2 * s : c2 / theta * s * (s * s - 2.0 * c * c);
    };
    // Angles where the circle of radius r about x meets the sphere of radius
    // `cusp` about the test function's centre, and the ray through the centre.
    std::vector<double> centre(2, 0.0);
    std::vector<double> cusp_radii;
    if (const auto* c = std::get_if<CappedPower>(&f.kind())) {
        for (std::size_t i = 0; i < c->center.size() && i < 2; ++i) centre[i] = c->center[i];
        cusp_radii = {1.0};
    }
    const double dx = centre[0] - x[0], dy = centre[1] - x[1];
    const double dist = std::hypot(dx, dy), towards = std::atan2(dy, dx);
    auto ring = [&](double psi) {
        const double r = theta * std::tan(psi);
        std::vector<double> breaks;
        if (!cusp_radii.empty() && dist > 0.0) {
            for (double rho : cusp_radii) {
                const double c = (dist * dist + r * r - rho * rho) / (2.0 * r * dist);
                if (std::abs(c) < 1.0) {
                    const double a = std::acos(c);
                    for (double phi : {towards + a, towards - a}) breaks.push_back(phi - 2.0 * kPi * std::floor(phi / (2.0 * kPi)));
                }
            }
            breaks.push_back(towards - 2.0 * kPi * std::floor(towards / (2.0 * kPi)));
        }
        std::vector<double> y(2);
        return integrate_cusped(
            [&](double phi) {
                y[0] = x[0] + r * std::cos(phi);
                y[1] = x[1] + r * std::sin(phi);
                return f(y);
            },
            0.0, 2.0 * kPi, breaks, 1e-10, 1e-10);
    };
    double near = 0.0;
    if (psi_far > 0.0) {
        // Radii where the ring passes through the centre or touches the cusp sphere.
        std::vector<double> psi_breaks;
        for (double rr : {dist, dist + 1.0, std::abs(dist - 1.0)})
            if (!cusp_radii.empty() && rr > 0.0) psi_breaks.push_back(std::atan(rr / theta));
        near = integrate_cusped([&](double psi) { return radial_weight(psi) * ring(psi); }, 0.0, psi_far, psi_breaks,
                                1e-9, 1e-9);
    }
    // ∫_{ψ_far}^{π/2} of the weight times 2π·value.
    const double cf = std::cos(psi_far);
    const double weight_tail = k == Kernel::Density ? c2 * cf : c2 / theta * (cf - cf * cf * cf);
    return near + 2.0 * kPi * ec.value * weight_tail;
}

} // namespace

LineProfile line_profile(const TestFunction& f) {
    const double sc = f.scale();
    LineProfile p;
    p.value = [f](double y) { return f(std::span<const double>(&y, 1)); };
    p.breaks = f.breakpoints();
    if (const auto* s = std::get_if<Sinusoid>(&f.kind())) {
        const double xi = s->frequency.empty() ? 0.0 : s->frequency[0];
        p.left = p.right = {0.0, sc, xi, s->phase};
    } else if (const auto* c = std::get_if<CappedPower>(&f.kind())) {
        const double center = c->center.empty() ? 0.0 : c->center[0];
        p.radius = std::abs(center) + 1.0;
        p.left = p.right = {sc};
    } else if (const auto* c = std::get_if<Constant>(&f.kind())) {
        p.left = p.right = {sc * c->value};
    } else if (const auto* ind = std::get_if<IndicatorSmoothed>(&f.kind())) {
        // tanh saturates to double precision within 20 widths.
        p.radius = std::abs(ind->edge) + 40.0 * ind->width;
        p.left = {0.0};
        p.right = {sc};
    } else if (const auto* g = std::get_if<GaussianBump>(&f.kind())) {
        p.radius = std::abs(g->center.empty() ? 0.0 : g->center[0]) + 40.0 * g->width;
    } else {
        throw InvalidParameter("Poisson integrals need a bounded test function");
    }
    return p;
}

double poisson_constant(int dim) {
    const double h = 0.5 * (dim + 1);
    return std::tgamma(h) / std::pow(kPi, h);
}

double poisson_kernel(int dim, double theta, double r) {
    return poisson_constant(dim) * theta * std::pow(theta * theta + r * r, -0.5 * (dim + 1));
}

double poisson_kernel_dtheta(int dim, double theta, double r) {
    const double q = theta * theta + r * r;
    return poisson_constant(dim) * (r * r - dim * theta * theta) * std::pow(q, -0.5 * (dim + 3));
}

double poisson_kernel_mass(int dim, double theta) {
    const double area = sphere_area(dim);
    const auto radial = [&](double r) { return area * std::pow(r, dim - 1) * poisson_kernel(dim, theta, r); };
    // The substitution r = θ s makes the integral θ-free up to rounding.
    return integrate([&](double s) { return theta * radial(theta * s); }, 0.0, 1.0, 1e-14, 1e-13) +
           integrate_to_infinity([&](double s) { return theta * radial(theta * s); }, 1.0, 1e-12);
}

double poisson_integral(const LineProfile& f, double theta, double x) {
    return line_integral(Kernel::Density, f, theta, x);
}

double poisson_theta_derivative(const LineProfile& f, double theta, double x) {
    return line_integral(Kernel::ThetaDerivative, f, theta, x);
}

double poisson_integral(const TestFunction& f, int dim, double theta, std::span<const double> x) {
    require(static_cast<int>(x.size()) == dim, "point dimension mismatch");
    if (dim == 1) return poisson_integral(line_profile(f), theta, x[0]);
    require(dim == 2, "Poisson integrals are available in dimensions 1 and 2");
    return plane_integral(Kernel::Density, f, theta, x);
}

double poisson_theta_derivative(const TestFunction& f, int dim, double theta, std::span<const double> x) {
    require(static_cast<int>(x.size()) == dim, "point dimension mismatch");
    if (dim == 1) return poisson_theta_derivative(line_profile(f), theta, x[0]);
    require(dim == 2, "Poisson integrals are available in dimensions 1 and 2");
    return plane_integral(Kernel::ThetaDerivative, f, theta, x);
}

double commutator(const LineProfile& f, const LineProfile& g, double theta, double x) {
    const double fx = f.value(x);
    LineProfile h;
    h.value = [&](double y) { return (f.value(y) - fx) * g.value(y); };
    h.breaks = f.breaks;
    h.breaks.insert(h.breaks.end(), g.breaks.begin(), g.breaks.end());
    h.radius = std::max(f.radius, g.radius);
    h.left = product(f.left, fx, g.left);
    h.right = product(f.right, fx, g.right);
    return line_integral(Kernel::ThetaDerivative, h, theta, x);
}

SeminormEstimate holder_seminorm_estimate(const LineProfile& f, double beta, std::span<const double> theta_grid,
                                          std::span<const double> x_grid, double small_theta,
                                          double slope_tolerance) {
    require_decades(theta_grid, 4.0);
    require(!x_grid.empty(), "empty x grid");
    require(beta > 0.0 && beta <= 1.0, "Hölder exponent must lie in (0, 1]");
    SeminormEstimate out;
    out.points = parallel_map(theta_grid.size(), [&](std::size_t i) {
        const double theta = theta_grid[i];
        double sup = 0.0;
        for (double x : x_grid) sup = std::max(sup, std::abs(poisson_theta_derivative(f, theta, x)));
        return ThetaPoint{theta, sup, std::pow(theta, 1.0 - beta) * sup};
    });
    std::vector<double> lt, ls;
    for (const auto& p : out.points) {
        out.seminorm = std::max(out.seminorm, p.scaled);
        if (p.theta <= small_theta && p.sup > 0.0) {
            lt.push_back(std::log(p.theta));
            ls.push_back(std::log(p.sup));
        }
    }
    require(lt.size() >= 2, "need two θ values below the small-θ threshold");
    const LinearFit fit = least_squares(lt, ls);
    out.slope = fit.slope;
    out.intercept = fit.intercept;
    out.consistent = fit.slope >= beta - 1.0 - slope_tolerance;
    return out;
}

CommutatorScaling commutator_scaling(const LineProfile& f, const LineProfile& g,
                                     std::span<const double> theta_grid, std::span<const double> x_grid) {
    require(theta_grid.size() >= 2 && !x_grid.empty(), "commutator scaling needs a θ grid and an x grid");
    CommutatorScaling out;
    out.points = parallel_map(theta_grid.size(), [&](std::size_t i) {
        const double theta = theta_grid[i];
        double sup = 0.0;
        for (double x : x_grid) sup = std::max(sup, std::abs(commutator(f, g, theta, x)));
        return ThetaPoint{theta, sup, sup};
    });
    std::vector<double> lt, ls;
    for (const auto& p : out.points) {
        lt.push_back(std::log(p.theta));
        ls.push_back(std::log(p.sup));
    }
    const LinearFit fit = least_squares(lt, ls);
    out.slope = fit.slope;
    out.intercept = fit.intercept;
    return out;
}

} // namespace levyflow
