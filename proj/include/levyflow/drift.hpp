#pragma once

#include <span>
#include <vector>

namespace levyflow {

enum class DriftShape {
    Zero,
    CappedPower, ///< A·min(|x−c|^β, 1)·e
    Restoring,   ///< −A·min(|x−c|^β, 1)·(x−c)/|x−c|
    Sinusoid,    ///< A·sin(ξ·x + phase)·e
    Linear,      ///< A·(x − c), unbounded
};

/// Closed-form vector field b(t, x) = (1 + m·sin 2πt)·b(x) on R^d, optionally
/// convolved with the scaled bump ϱ_n(x) = n^d ϱ(nx), ϱ(x) = c_d(1−|x|²)³.
struct DriftSpec {
    DriftShape shape = DriftShape::Zero;
    int dim = 1;
    double beta = 1.0;
    double amplitude = 1.0;
    std::vector<double> center;    ///< empty means the origin
    std::vector<double> direction; ///< empty means e_1
    std::vector<double> frequency; ///< for Sinusoid; empty means e_1
    double phase = 0.0;
    double modulation = 0.0;
    int mollification = 0; ///< n > 0 selects ϱ_n * b

    std::vector<double> operator()(double t, std::span<const double> x) const;
    /// The time-independent profile b(x) (with mollification, without modulation).
    std::vector<double> profile(std::span<const double> x) const;
    double time_factor(double t) const;

    /// Declared bounds: ‖b‖∞, Hölder exponent β and [b]_β.
    double sup_norm() const;
    double holder_exponent() const;
    double holder_constant() const;
    bool is_zero() const { return shape == DriftShape::Zero || amplitude == 0.0; }
};

/// Normalising constant of the bump: 35/32 in d = 1, 4/π in d = 2.
double mollifier_constant(int dim);
double mollifier(int dim, double r);

/// b^n = ϱ_n * b evaluated by quadrature. Declared norms are inherited, and
/// they remain upper bounds since ϱ_n is a probability density.
DriftSpec mollify_drift(const DriftSpec& b, int n);

/// Convenience constructors.
DriftSpec zero_drift(int dim = 1);
DriftSpec capped_power_drift(double beta, double amplitude, int dim = 1);
DriftSpec restoring_drift(double beta, double amplitude, int dim = 1);
DriftSpec sinusoid_drift(double amplitude, double frequency = 1.0, int dim = 1);

} // namespace levyflow
