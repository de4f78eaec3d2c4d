#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "levyflow/levy_model.hpp"
#include "levyflow/rng.hpp"
#include "levyflow/stats.hpp"

namespace levyflow {

/// sin(ξ·x + phase).
struct Sinusoid {
    std::vector<double> frequency{1.0};
    double phase = 0.0;
};

/// min(|x − center|^β, 1), where |·| runs over coordinates
/// [axis_offset, axis_offset + axis_dim) when axis_dim > 0 and over all
/// coordinates otherwise.
struct CappedPower {
    double beta = 0.5;
    std::vector<double> center;
    int axis_offset = 0;
    int axis_dim = 0;
};

/// Smoothed indicator of {x_1 > edge}: (1 + tanh((x_1 − edge)/width))/2.
struct IndicatorSmoothed {
    double edge = 0.0;
    double width = 0.05;
};

struct Constant {
    double value = 1.0;
};

/// exp(−|x − center|² / (2 width²)).
struct GaussianBump {
    std::vector<double> center;
    double width = 0.1;
};

/// coef·x (unbounded; only meaningful on a bounded window).
struct Linear {
    std::vector<double> coef{1.0};
};

/// Closed-form test function with its declared Hölder exponent and constant.
class TestFunction {
public:
    using Kind = std::variant<Sinusoid, CappedPower, IndicatorSmoothed, Constant, GaussianBump, Linear>;

    TestFunction(Kind kind) : kind_(std::move(kind)) {}

    double operator()(std::span<const double> x) const;
    std::vector<double> gradient(std::span<const double> x) const;

    /// Declared (β, Λ) with |f(x+y) − f(x)| ≤ Λ|y|^β.
    double holder_exponent() const;
    double holder_constant() const;
    double sup_norm() const;
    /// Points in the first coordinate where f fails to be smooth.
    std::vector<double> breakpoints() const;

    const Kind& kind() const { return kind_; }
    TestFunction scaled(double c) const;
    double scale() const { return scale_; }

private:
    Kind kind_;
    double scale_ = 1.0;
};

/// Monte Carlo T_t f(x) = E f(x + Z_t).
Estimate apply_semigroup(const LevyModel& model, const TestFunction& f, double t,
                         std::span<const double> x, std::size_t n_samples, RngStream& rng);

struct SpectralOptions {
    double half_width = 5.0 * 3.14159265358979323846;
    int points = 1024;
};

struct SpectralValue {
    double value = 0.0;
    double aliasing_bound = 0.0; ///< bound on the periodic-extension error
};

/// T_t f(x) for the isotropic stable model by multiplying the DFT of f on a
/// periodic grid with e^{−t|k|^α}.
SpectralValue spectral_semigroup(const IsotropicStable& model, const TestFunction& f, double t,
                                 std::span<const double> x, const SpectralOptions& opts = {});

/// ∇T_t f(x) through the subordination weight W/S (per block), with f
/// centred at f(x).
std::vector<Estimate> gradient_semigroup(const LevyModel& model, const TestFunction& f, double t,
                                         std::span<const double> x, std::size_t n_samples, RngStream& rng);

struct ScalingPoint {
    double t = 0.0;
    double sup_gradient = 0.0;
    double se = 0.0;
    double argmax = 0.0;
};

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    std::vector<ScalingPoint> points;
};

/// Least-squares slope of log sup_x |∇T_t f(x)| against log t.
///
/// The sup runs over 33 points per coordinate axis through x0 on [−4, 4],
/// together with the same points scaled by t^{1/α_j} of the coordinate's
/// block, which resolves the small-t peak near a cusp. It is a lower bound of
/// the true sup. Stable clocks are sampled once at unit time and rescaled to
/// each t, so all t share common random numbers.
ScalingFit fit_gradient_scaling(const LevyModel& model, const TestFunction& f, std::span<const double> t_grid,
                                std::span<const double> x0, std::size_t n_samples, std::uint64_t seed);

struct NegativeMomentPoint {
    double t = 0.0;
    Estimate mc;
    double oracle = 0.0;
};

struct NegativeMomentResult {
    std::vector<NegativeMomentPoint> points;
    double slope = 0.0;
    double intercept = 0.0;
};

/// E S_t^{−p} = (1/(pΓ(p))) ∫_0^∞ exp(−tφ(u^{1/p})) du by exp-sinh quadrature.
double negative_moment_oracle(const SubordinatorSpec& sub, double p, double t);

/// Monte Carlo E S_t^{−p} on a t grid (independent streams per t), the
/// quadrature oracle, and the fitted log-log slope of the MC values.
NegativeMomentResult negative_moment(const SubordinatorSpec& sub, double p, std::span<const double> t_grid,
                                     std::size_t n_samples, std::uint64_t seed);

/// Throws InsufficientDecades unless max/min of the grid is at least 10^decades.
void require_decades(std::span<const double> grid, double decades);

} // namespace levyflow
