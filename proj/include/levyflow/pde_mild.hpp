#pragma once

#include <span>
#include <vector>

#include "levyflow/drift.hpp"
#include "levyflow/levy_model.hpp"

namespace levyflow {

/// Periodic space grid on [−L, L)^d times a uniform grid on [0, 1]. Drift
/// and source are multiplied by a smooth cutoff that vanishes on the outer
/// collar of width `cutoff_width`, so their periodic extension is smooth.
struct SpaceTimeGrid {
    int dim = 1;
    int points = 512;
    double half_width = 16.0;
    double cutoff_width = 2.0;
    int steps = 256;

    double h() const { return 1.0 / steps; }
    double spacing() const { return 2.0 * half_width / points; }
    /// Largest |x|_∞ at which the cutoff equals one.
    double interior() const { return half_width - cutoff_width; }
};

/// Smooth cutoff: 1 on |x|_∞ ≤ L − w, 0 at |x|_∞ = L (identically 1 when w = 0).
double torus_cutoff(const SpaceTimeGrid& grid, std::span<const double> x);

struct MildOptions {
    double tolerance = 1e-6;
    int max_iterations = 200;
};

struct MildDiagnostics {
    double sup_u = 0.0;         ///< sup_t ‖u_t‖∞
    double sup_f = 0.0;         ///< sup_t ‖f_t‖∞ on the grid
    double grad_sup = 0.0;      ///< ‖∇u‖∞
    double grad_seminorm = 0.0; ///< grid [∇u]_γ
    int iterations = 0;
    double last_difference = 0.0;
    std::vector<double> differences; ///< sup‖u^{(k+1)} − u^{(k)}‖∞ per iteration
    double theta0_fit = 0.0;         ///< set by choose_lambda
};

/// Vector-valued solution u: [0,1] × torus → R^d of the backward equation
/// ∂_t u + (L − λ)u + b·∇u + f = 0, u_1 = 0, on a space-time grid.
struct MildSolution {
    SpaceTimeGrid grid;
    double lambda = 0.0;
    double gamma = 0.0;
    std::vector<double> u;    ///< (steps+1) × nodes × d
    std::vector<double> grad; ///< (steps+1) × nodes × d × d, entry [j][k] = ∂_k u_j
    MildDiagnostics diagnostics;

    std::size_t nodes() const;
    double u_at(int step, std::size_t node, int comp) const;
    /// u_t(x) by periodic multilinear interpolation in x and linear in t.
    std::vector<double> value(double t, std::span<const double> x) const;
    /// ∇u_t(x) as a row-major d × d matrix.
    std::vector<double> gradient(double t, std::span<const double> x) const;
};

/// Picard iteration of the mild form on the torus. Each sweep integrates
/// backwards in time with the exact factor e^{−(λ+ψ(k))h} per step and the
/// source integrated exactly along its linear interpolant in time; ∇u comes
/// from spectral differentiation.
/// ψ is the model's characteristic exponent (including the drift η), so every
/// model family is handled deterministically. Throws NoConvergence with the
/// contraction history when the iteration cap is hit.
MildSolution solve_mild(const LevyModel& model, const DriftSpec& b, const DriftSpec& f, double lambda,
                        const SpaceTimeGrid& grid, const MildOptions& options = {}, double gamma = 0.5);

/// max over dyadic offsets and nodes of |F(x + m·dx·e_axis) − F(x)| / (m·dx)^γ
/// along every axis, for one field on the grid.
double grid_holder_seminorm(std::span<const double> field, const SpaceTimeGrid& grid, double gamma);

struct LambdaChoice {
    double lambda = 0.0;
    MildSolution solution;
    std::vector<double> lambdas;    ///< every λ solved in the sweep
    std::vector<double> grad_sups;  ///< ‖∇u‖∞ per λ
    std::vector<double> criterion;  ///< ‖∇u‖∞ + [∇u]_γ per λ
};

/// Smallest λ in {1, 2, 4, …, 2^20} with ‖∇u‖∞ + [∇u]_γ ≤ 1/2. The sweep
/// always covers at least three λ values so that θ0 can be fitted from
/// ‖∇u‖∞ ∝ λ^{−θ0}. Throws LambdaSearchFailure when no λ qualifies.
LambdaChoice choose_lambda(const LevyModel& model, const DriftSpec& b, const DriftSpec& f, double gamma,
                           const SpaceTimeGrid& grid, const MildOptions& options = {}, double target = 0.5);

/// Smooth compactly supported weight exp(1 − 1/(1 − |x−c|²/R²)).
struct WeakTestFunction {
    std::vector<double> center{0.7};
    double radius = 2.0;

    double operator()(std::span<const double> x) const;
};

struct WeakResidual {
    std::vector<double> checkpoints; ///< t values
    std::vector<double> defects;     ///< max over components at each checkpoint
    double max = 0.0;
};

/// Defect of ⟨u_t,φ⟩ = ∫_t^1 ⟨u_s,(L*−λ)φ⟩ + ⟨b_s·∇u_s + f_s, φ⟩ ds at
/// t ∈ {0, 1/4, 1/2, 3/4}, with L*φ applied through the symbol and the time
/// integral by Simpson's rule on the solution grid.
WeakResidual weak_residual(const MildSolution& solution, const LevyModel& model, const DriftSpec& b,
                           const DriftSpec& f, const WeakTestFunction& phi = {});

/// max |∂_t u + (L − λ)u + b·∇u + f| over interior times and nodes at least
/// one unit inside the cutoff, with ∂_t by the fourth-order centred stencil.
double strong_defect(const MildSolution& solution, const LevyModel& model, const DriftSpec& b, const DriftSpec& f);

} // namespace levyflow
