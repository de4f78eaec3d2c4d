#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "levyflow/levy_model.hpp"
#include "levyflow/rng.hpp"

namespace levyflow {

/// Uniform grid 0 = t_0 < … < t_N = horizon.
struct TimeGrid {
    int steps = 256;
    double horizon = 1.0;

    double h() const { return horizon / steps; }
    double t(int i) const { return horizon * static_cast<double>(i) / steps; }
};

/// A subordinated block of coordinates driven by its own clock.
struct BlockSpec {
    SubordinatorSpec sub;
    int dim = 1;
};

/// Blocks of a subordinated family; throws UnsupportedModel for other families.
std::vector<BlockSpec> subordinated_blocks(const LevyModel& model);

/// Increment S_h of the subordinator with E e^{−λS_h} = e^{−hλ^ρ}
/// (Kanter's representation: one uniform and one exponential draw).
double sample_stable_subordinator(double rho, double h, RngStream& rng);

/// Increment over a step of length h of an arbitrary subordinator spec.
/// The relativistic case uses exponential tilting with rejection.
double sample_subordinator(const SubordinatorSpec& sub, double h, RngStream& rng);

/// Subordinated Brownian block of a path: clock values and Brownian values at
/// the clock, sampled on the grid.
struct SubordinatedBlock {
    int offset = 0; ///< first coordinate of this block in Z
    int dim = 1;
    std::vector<double> clock; ///< S_{t_i}, size N+1
    std::vector<double> bm;    ///< W_{S_{t_i}}, (N+1) × dim row-major
};

struct BigJump {
    int step = 0;     ///< the jump lands in (t_step, t_{step+1}]
    double time = 0.0;
    std::vector<double> z;
};

/// Noise primitives on a time grid, split at the jump threshold r0.
///
/// For every step i: z_incr[i] = small[i] + (sum of big jumps in step i) +
/// eta_r0·h, evaluated in exactly that order so the identity is bitwise.
struct PathGrid {
    TimeGrid grid;
    int dim = 1;
    std::vector<SubordinatedBlock> blocks; ///< empty for stable-type models
    std::vector<double> z_incr;            ///< N × dim
    std::vector<double> small;             ///< N × dim, compensated small-jump part
    std::vector<BigJump> big_jumps;        ///< ordered by step, then time
    std::vector<double> eta_r0;
    double r0 = 1.0;
    double small_variance = 0.0;  ///< per coordinate per unit time; 0 when sampled exactly
    double truncation_bias = 0.0; ///< ∫_{|z|≤r0}|z|³ν(dz), the Gaussian substitution's error scale
    double envelope_acceptance = 1.0;
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    std::span<const double> incr(int i) const { return {z_incr.data() + i * dim, static_cast<std::size_t>(dim)}; }
    std::span<const double> small_at(int i) const { return {small.data() + i * dim, static_cast<std::size_t>(dim)}; }
    /// Z_{t_i} accumulated from the increments.
    std::vector<double> value_at(int i) const;
};

/// Z_t = W_{S_t} on the grid. Whole-step increments with |ΔZ| > r0 become big marks.
PathGrid sample_subordinate_bm_path(const LevyModel& model, const TimeGrid& grid, double r0,
                                    RngStream& rng);

/// Independent per-block subordinated paths. A single block reproduces
/// sample_subordinate_bm_path bit for bit.
PathGrid sample_cylindrical_path(const LevyModel& model, const TimeGrid& grid, double r0,
                                 RngStream& rng);

/// Lévy-Itô split of a radial-density model: exact Poisson marks above r0
/// (thinned from a piecewise-power envelope) and a moment-matched Gaussian below.
PathGrid sample_stable_type_path(const LevyModel& model, double r0, const TimeGrid& grid,
                                 RngStream& rng);

/// Dispatches to the sampler matching the model family.
PathGrid sample_path(const LevyModel& model, const TimeGrid& grid, double r0, RngStream& rng);

/// Per-coordinate variance rate (1/d)∫_{|z|≤r0}|z|²ν(dz) of a radial density.
double small_jump_variance(const RadialDensity& kappa, double r0);

/// ν({|z| > r0}) for a radial density.
double tail_mass(const RadialDensity& kappa, double r0);

/// Radial density used by the stable-type sampler for families that have one.
RadialDensity sampling_density(const LevyModel& model);

/// One draw of a subordinated model at time t: per-block clocks and Z_t.
struct SubordinatedDraw {
    std::vector<double> clock; ///< S^j_t per block
    std::vector<double> z;     ///< Z_t = W_{S_t}
};

/// Exact draw of Z_t for subordinated families (isotropic, subordinate BM,
/// relativistic, cylindrical).
SubordinatedDraw sample_subordinated(const LevyModel& model, double t, RngStream& rng);

/// Z_t for any family; stable-type models use one split step at threshold r0.
std::vector<double> sample_marginal(const LevyModel& model, double t, RngStream& rng,
                                    double r0 = 0.05);

/// The same noise on a grid with `factor` times fewer steps: increments and
/// small parts are summed, big marks keep their times, clocks are subsampled.
PathGrid coarsen(const PathGrid& path, int factor);

/// Columnar text dump: one row per grid time (t, Z, then S and W per block).
void write_path_dump(const PathGrid& path, std::ostream& os);

} // namespace levyflow
