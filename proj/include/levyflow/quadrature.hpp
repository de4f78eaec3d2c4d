#pragma once

#include <functional>
#include <span>

namespace levyflow {

using ScalarFn = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (15-point) on [a, b]; throws QuadratureFailure when
/// the error estimate stays above `abs_tol` (or `rel_tol`·|I|).
double integrate(const ScalarFn& f, double a, double b, double abs_tol = 1e-10,
                 double rel_tol = 1e-12, unsigned max_depth = 20);

/// As integrate(), splitting [a, b] at the given interior points first.
double integrate_split(const ScalarFn& f, double a, double b, std::span<const double> breaks,
                       double abs_tol = 1e-10, double rel_tol = 1e-12);

/// ∫_a^∞ f by exp-sinh; f must decay at infinity.
double integrate_to_infinity(const ScalarFn& f, double a, double abs_tol = 1e-10);

/// Tanh-sinh on [a, b] split at the given interior points; tolerates
/// algebraic singularities and cusps at the piece endpoints. Throws
/// QuadratureFailure when the error exceeds max(abs_tol, rel_tol·L1).
double integrate_cusped(const ScalarFn& f, double a, double b, std::span<const double> breaks,
                        double abs_tol = 1e-13, double rel_tol = 1e-12);

/// ∫_0^∞ f(t) cos(ωt) dt (or sin when `sine`) by Ooura's double-exponential
/// rule; f must decay at infinity and ω > 0.
double fourier_integral(const ScalarFn& f, double omega, bool sine);

/// Fixed 20-point Gauss-Legendre rule on [a, b].
double gauss_legendre(const ScalarFn& f, double a, double b);

} // namespace levyflow
