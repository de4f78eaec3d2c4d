#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace levyflow {

/// Stable subordinator with Laplace exponent φ(λ) = (scale·λ)^ρ.
///
/// scale = 1 is the textbook normalisation. Subordinating a Brownian motion
/// with generator Δ/2 by scale = 2 yields the symbol |ξ|^α, so α = 1 is the
/// standard Cauchy process; model constructors use that convention.
struct StableSub {
    double rho = 0.5;
    double scale = 1.0;
};

/// Relativistic stable subordinator, φ(λ) = (λ + m^{2/α})^{α/2} − m.
struct RelativisticSub {
    double alpha = 1.0;
    double mass = 1.0;
};

/// Deterministic clock S_t = t, φ(λ) = λ. Subordinating by it gives Brownian motion.
struct IdentitySub {};

using SubordinatorSpec = std::variant<StableSub, RelativisticSub, IdentitySub>;

double laplace_exponent(const SubordinatorSpec& sub, double lambda);
/// The index α with φ(λ) ≍ λ^{α/2} at infinity (2 for the identity clock).
double subordinator_alpha(const SubordinatorSpec& sub);

/// One term coef·r^{−d−alpha} supported on r_lo ≤ r < r_hi of a radial density.
struct PowerPiece {
    double coef = 1.0;
    double alpha = 1.0;
    double r_lo = 0.0;
    double r_hi = 1.0; ///< may be +infinity
};

/// Radial Lévy density κ(r) = Σ pieces, in dimension `dim`.
struct RadialDensity {
    std::vector<PowerPiece> pieces;
    int dim = 1;

    double operator()(double r) const;
};

struct IsotropicStable {
    double alpha = 1.0;
    int dim = 1;
};

struct SubordinateBM {
    SubordinatorSpec subordinator = StableSub{0.5, 2.0};
    int dim = 1;
};

struct CylindricalBlock {
    double alpha = 1.0;
    int dim = 1;
};

struct CylindricalStable {
    std::vector<CylindricalBlock> blocks;
};

/// Lévy density squeezed between c1|z|^{−d−α1} and c2|z|^{−d−α2} on 0<|z|≤1.
struct StableTypeDensity {
    RadialDensity kappa;
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    double c1 = 1.0;
    double c2 = 1.0;
    int dim = 1;
};

struct RelativisticStable {
    double alpha = 1.0;
    double mass = 1.0;
    int dim = 1;
};

/// Isotropic α-stable Lévy measure restricted to |z| ≤ 1.
struct TruncatedStable {
    double alpha = 1.0;
    int dim = 1;
};

using ModelFamily = std::variant<IsotropicStable, SubordinateBM, CylindricalStable,
                                 StableTypeDensity, RelativisticStable, TruncatedStable>;

/// A Lévy process: its jump family plus the generator's drift vector η.
struct LevyModel {
    ModelFamily family;
    std::vector<double> eta; ///< empty means zero drift

    int dim() const;
    std::string family_name() const;
    double eta_component(int i) const { return i < static_cast<int>(eta.size()) ? eta[i] : 0.0; }
};

/// Throws InvalidParameter if any index, dimension or constant is out of range.
void validate(const LevyModel& model);

// Convenience constructors.
LevyModel isotropic_stable(double alpha, int dim);
LevyModel subordinate_stable(double alpha, int dim);
LevyModel subordinate_relativistic(double alpha, double mass, int dim);
LevyModel cylindrical_stable(std::vector<CylindricalBlock> blocks);
/// Stable-type model with κ(r) = c·r^{−d−α} (a single power law).
LevyModel stable_type_power(double alpha, double c, int dim);

/// Surface area of the unit sphere in R^d.
double sphere_area(int dim);
/// Constant of the rotationally symmetric α-stable Lévy density with symbol |ξ|^α.
double stable_density_constant(int dim, double alpha);

/// Radial density of the model's Lévy measure at |z| = r (not defined for
/// the cylindrical family, whose measure lives on block axes).
double levy_density(const LevyModel& model, double r);

/// Radial density of a subordinated Brownian motion's Lévy measure.
double subordinated_density(const SubordinatorSpec& sub, int dim, double r);

/// Real part of the characteristic exponent: E cos(ξ·Z_1) = exp(−symbol_re(ξ)).
double symbol_re(const LevyModel& model, const std::vector<double>& xi);

/// Real part of the exponent contributed by one power piece at frequency |ξ| = k.
double power_piece_symbol(const PowerPiece& piece, int dim, double k);

/// Stable-type split ν = ν0 + ν1 + ν2 with ν1 the full c1-stable measure.
struct MeasureDecomposition {
    RadialDensity nu0; ///< finite signed part
    RadialDensity nu1;
    RadialDensity nu2;
    double total_variation_nu0 = 0.0;
};

MeasureDecomposition decompose(const StableTypeDensity& model);

/// ∫_{|z|≤1} |z|^{2γ} ν(dz); std::nullopt when the integral diverges.
std::optional<double> small_jump_moment(const LevyModel& model, double gamma);

struct HypothesisParams {
    double alpha = 1.0;     ///< index of the gradient estimate
    double alpha_bar = 1.0; ///< largest Hölder exponent the estimate accepts
    double delta = 1.0;     ///< exponent loss factor
    bool subcritical = false; ///< α > 1: the sup-norm form of the estimate
    double alpha_eff = 1.0; ///< largest local order of ν near 0
    double gamma_floor = 0.5; ///< moments ∫|z|^{2γ}ν converge for γ > gamma_floor
    std::optional<double> k0; ///< fitted diagnostic only, never an input
};

HypothesisParams hypothesis_params(const LevyModel& model);

struct BetaInterval {
    double lo = 0.0; ///< open endpoint
    double hi = 1.0; ///< closed endpoint
    bool contains(double beta) const { return beta > lo && beta <= hi; }
};

/// Hölder exponents of the drift for which strong well-posedness holds.
BetaInterval admissible_beta(const LevyModel& model);

/// Lower end of the admissible β range for a given γ (the PDE range).
double beta_floor(const HypothesisParams& hp, double gamma);

} // namespace levyflow
