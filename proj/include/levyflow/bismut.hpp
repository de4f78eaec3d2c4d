#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "levyflow/drift.hpp"
#include "levyflow/levy_model.hpp"
#include "levyflow/rng.hpp"
#include "levyflow/semigroup.hpp"
#include "levyflow/stats.hpp"
#include "levyflow/zvonkin.hpp"

namespace levyflow {

struct GradientOptions {
    std::size_t replicas = 4000;
    int steps_per_unit = 256; ///< a horizon t uses max(16, round(t·steps_per_unit)) steps
    std::uint64_t seed = 0;
    StreamTag tag = StreamTag::Bismut;
    std::uint64_t stream_offset = 0; ///< added to the replica index in stream ids
};

/// Steps used for a flow over [0, t].
int flow_steps(double t, int steps_per_unit);

struct BismutEstimate {
    std::vector<Estimate> gradient;
    std::size_t used = 0;    ///< replicas that stayed in the resolved region
    std::size_t escaped = 0; ///< discarded replicas
    /// Mean of |(1/S_t) ∫∇X dW_S|² over the used replicas.
    double weight_second_moment = 0.0;
};

/// ∇E f(X_t(x)) as the mean of (f(X_t) − f(x)) Σ_blocks (1/S^j_t) Σ_i ∇X_{s_i}^T ΔW^j_i
/// over replicas, the sum running over left points of the flow grid.
/// Requires a subordinated model.
BismutEstimate bismut_gradient(const ZvonkinTransform& tr, const LevyModel& model, const TestFunction& f,
                               double t, std::span<const double> x, const GradientOptions& options);

struct FdEstimate {
    std::vector<Estimate> gradient;
    /// Richardson estimate (D_{2ε} − D_ε)/3 of the O(ε²) bias, per component.
    std::vector<double> bias;
};

/// Central difference of E f(X_t(x ± εe_i)) with the plain Euler scheme for
/// the original equation; both signs (and the 2ε companion) share each path.
FdEstimate fd_gradient(const LevyModel& model, const DriftSpec& b, const TestFunction& f, double t,
                       std::span<const double> x, double step, const GradientOptions& options);

struct DecayPoint {
    double t = 0.0;
    double gradient_norm = 0.0;
    double se = 0.0;
};

struct DecayResult {
    std::vector<DecayPoint> points;
    double slope = 0.0; ///< of log|∇E f(X_t(x))| against log t
    double intercept = 0.0;
    double residual = 0.0;
    double bound = 0.0; ///< −1/α − 0.15
    bool passed() const { return slope >= bound; }
};

/// Bismut estimates on a t grid (independent streams per t) and the fitted
/// log-log slope. Throws InsufficientDecades when the grid spans under 1.5 decades.
DecayResult decay_check(const ZvonkinTransform& tr, const LevyModel& model, const TestFunction& f,
                        std::span<const double> t_grid, std::span<const double> x,
                        const GradientOptions& options);

/// E|(1/S_t)∫∇X dW_S|^p over replicas of the flow started at x.
Estimate bismut_weight_moment(const ZvonkinTransform& tr, const LevyModel& model, double t,
                              std::span<const double> x, double p, const GradientOptions& options);

/// E S_t^{−p/2}·E|N|^p, the zero-drift value of bismut_weight_moment in d = 1.
double zero_drift_weight_moment(const SubordinatorSpec& sub, double t, double p);

} // namespace levyflow
