#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "levyflow/drift.hpp"
#include "levyflow/levy_model.hpp"
#include "levyflow/pde_mild.hpp"
#include "levyflow/samplers.hpp"

namespace levyflow {

/// Torus used for flows: wide enough that heavy-tailed paths rarely leave it.
SpaceTimeGrid flow_grid(int dim = 1);

struct TransformOptions {
    SpaceTimeGrid grid = flow_grid();
    MildOptions mild;
    double lambda = 0.0;   ///< fixed λ when positive, otherwise the doubling search
    double r0 = 0.0;       ///< fixed jump threshold when positive, otherwise selected from C0
    int fit_samples = 4000;
    double fit_margin = 1.1; ///< fitted constants are the sample maxima times this factor
    std::uint64_t seed = 0;
};

/// Φ_t = id + u_t with u solving the backward equation with source b, plus
/// everything the transformed equation needs.
struct ZvonkinTransform {
    LevyModel model;
    MildSolution u;
    /// ∫_{|z|≥r0} (u_t(x+z) − u_t(x)) ν(dz) on the grid, laid out like u.
    std::vector<double> tail;
    double lambda = 0.0;
    double gamma = 0.0;
    double r0 = 0.5;
    std::vector<double> eta_r0;
    double C0 = 0.0; ///< ‖∇g(·,z)‖ ≤ C0 (1 ∧ |z|^γ)
    double C1 = 0.0; ///< Lipschitz constant of g(·,z) in y
    double C2 = 0.0; ///< bounds ‖∇a‖∞ and ‖a‖∞/(1 + ‖b‖∞)
    double drift_sup = 0.0;

    int dim() const { return u.grid.dim; }
    /// Flows are resolved while |x|∞ stays below this radius; unbounded when u ≡ 0.
    double escape_radius() const {
        return drift_sup > 0.0 ? u.grid.interior() - 1.0 : std::numeric_limits<double>::infinity();
    }
};

/// Largest r0 = 2^{-k}, k ≥ 1, with C0·r0^γ + 3r0/2 < 1. Throws R0SearchFailure.
double select_r0(double c0, double gamma);

/// ∫_{|z|≥r0} (cos(k·z) − 1) ν(dz), the multiplier of the big-jump part of the
/// generator, for radial and cylindrical models.
double tail_multiplier(const LevyModel& model, double r0, std::span<const double> k);

/// Transform around a given solution u; fits C0, selects r0 (unless fixed),
/// evaluates the big-jump integral on the grid and fits C1, C2.
ZvonkinTransform make_transform(const LevyModel& model, MildSolution u, double drift_sup,
                                const TransformOptions& options = {});

/// choose_lambda with f := b followed by make_transform.
ZvonkinTransform build_transform(const LevyModel& model, const DriftSpec& b, double gamma,
                                 const TransformOptions& options = {});

std::vector<double> phi(const ZvonkinTransform& tr, double t, std::span<const double> x);
/// Fixed point x = y − u_t(x); tolerance 1e-10, at most 60 iterations.
/// Throws InverseNoConvergence.
std::vector<double> phi_inverse(const ZvonkinTransform& tr, double t, std::span<const double> y);
/// I + ∇u_t(x), row-major.
std::vector<double> grad_phi(const ZvonkinTransform& tr, double t, std::span<const double> x);

/// g_s(y, z) = Φ_s(Φ_s^{-1}(y) + z) − y.
std::vector<double> transformed_jump_g(const ZvonkinTransform& tr, double s, std::span<const double> y,
                                       std::span<const double> z);
/// ∇_y g_s(y, z) = ∇Φ_s(x + z)·∇Φ_s(x)^{-1} − I with x = Φ_s^{-1}(y).
std::vector<double> grad_jump_g(const ZvonkinTransform& tr, double s, std::span<const double> y,
                                std::span<const double> z);
/// a_s(y) = η_{r0} + λu_s(x) − ∫_{|z|≥r0}(u_s(x+z) − u_s(x))ν(dz) with x = Φ_s^{-1}(y).
std::vector<double> transformed_drift_a(const ZvonkinTransform& tr, double s, std::span<const double> y);

/// Held-out verification of the transform's structural bounds.
struct TransformCheck {
    int pairs = 0;
    double sandwich_low = 0.0;  ///< min |Φ(x) − Φ(x')| / |x − x'|
    double sandwich_high = 0.0; ///< max of the same ratio
    double inverse_grad = 0.0;  ///< max ‖∇Φ^{-1}‖
    double round_trip = 0.0;    ///< max |Φ(Φ^{-1}(y)) − y|
    double jump_ratio = 0.0;    ///< max |g(y,z)| / |z|
    double grad_jump_ratio = 0.0; ///< max ‖∇g(·,z)‖ / (C0 (1 ∧ |z|^γ))
    double drift_ratio = 0.0;   ///< max |a| / (C2 (1 + ‖b‖∞))
    double r0_condition = 0.0;  ///< C0 r0^γ + 3r0/2

    bool passed() const;
};

TransformCheck check_transform(const ZvonkinTransform& tr, int pairs, std::uint64_t seed);

/// One flow replica on a path grid.
struct FlowSample {
    std::vector<double> x0;
    TimeGrid grid;
    int dim = 1;
    std::vector<double> y;      ///< (N+1) × d
    std::vector<double> grad_y; ///< (N+1) × d × d
    std::vector<double> x;      ///< Φ^{-1}(Y)
    std::vector<double> grad_x; ///< ∇Φ^{-1}(Y)·∇Y
    /// Σ ∇X_{t_i}^T (W_{S_{t_{i+1}}} − W_{S_{t_i}}) per subordinated block, blocks × d.
    std::vector<double> bismut;
    std::vector<double> clock; ///< S_T per block
    double max_grad_jump = 0.0; ///< largest per-step change of ∇X
    std::uint64_t stream_id = 0;

    std::span<const double> x_at(int i) const { return {x.data() + i * dim, static_cast<std::size_t>(dim)}; }
    std::span<const double> grad_x_at(int i) const {
        return {grad_x.data() + i * dim * dim, static_cast<std::size_t>(dim * dim)};
    }
};

/// Euler scheme for Y with the variational equation for ∇Y. Small jumps are
/// transmitted through ∇Φ(X)·ΔZ_small, big marks through g exactly; ∇a and
/// ∇_y of both jump terms use centred differences with step 2^-10.
/// Throws StateEscape when X leaves the resolved region.
FlowSample solve_transformed_sde(const ZvonkinTransform& tr, std::span<const double> y0, const PathGrid& path);

/// X_t(x) = Φ_t^{-1}(Y_t(Φ_0(x))) together with ∇X and the Bismut accumulator.
FlowSample solve_flow(const ZvonkinTransform& tr, std::span<const double> x, const PathGrid& path);

/// Plain Euler scheme X ← X + b(t, X)h + ΔZ, (N+1) × d.
std::vector<double> solve_direct(const DriftSpec& b, std::span<const double> x, const PathGrid& path);

} // namespace levyflow
