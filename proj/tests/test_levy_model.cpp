#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "levyflow/errors.hpp"
#include "levyflow/levy_model.hpp"

using namespace levyflow;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LevyModel mixed_stable_type() {
    // κ(r) = r^{−1.8} + 0.5 r^{−2.4} 1_{r<1} in d = 1: squeezed between the
    // α1 = 0.8 and α2 = 1.4 power laws on (0,1].
    StableTypeDensity m;
    m.kappa = RadialDensity{{PowerPiece{1.0, 0.8, 0.0, kInf}, PowerPiece{0.5, 1.4, 0.0, 1.0}}, 1};
    m.alpha1 = 0.8;
    m.alpha2 = 1.4;
    m.c1 = 1.0;
    m.c2 = 1.5;
    m.dim = 1;
    return {m, {}};
}

} // namespace

TEST(LevyModel, StableDensityConstantCauchy) {
    EXPECT_NEAR(stable_density_constant(1, 1.0), 1.0 / std::numbers::pi, 1e-15);
    EXPECT_NEAR(sphere_area(2), 2.0 * std::numbers::pi, 1e-15);
    EXPECT_NEAR(sphere_area(3), 4.0 * std::numbers::pi, 1e-14);
}

TEST(LevyModel, SubordinatedStableDensityIsIsotropicStable) {
    for (int d : {1, 2, 3})
        for (double alpha : {0.7, 1.0, 1.5}) {
            const double r = 0.37;
            const double expect = stable_density_constant(d, alpha) * std::pow(r, -d - alpha);
            EXPECT_NEAR(subordinated_density(StableSub{0.5 * alpha, 2.0}, d, r) / expect, 1.0, 1e-12);
        }
}

TEST(LevyModel, RelativisticDensityMatchesMixtureIntegral) {
    // ∫ (2πu)^{−d/2} e^{−r²/2u} μ(du) with the tilted stable Lévy measure, mpmath.
    const RelativisticSub sub{1.2, 1.0};
    EXPECT_NEAR(subordinated_density(sub, 1, 0.5), 0.76951265628485933, 1e-12);
    EXPECT_NEAR(subordinated_density(sub, 1, 2.0), 0.0075146281615896606, 1e-14);
    EXPECT_NEAR(subordinated_density(sub, 2, 0.7), 0.27679973235573092, 1e-12);
}

TEST(LevyModel, LaplaceExponentInvariants) {
    const SubordinatorSpec subs[] = {StableSub{0.5, 1.0}, StableSub{0.75, 2.0}, RelativisticSub{1.2, 1.0},
                                     RelativisticSub{0.8, 2.5}};
    for (const auto& s : subs) {
        EXPECT_NEAR(laplace_exponent(s, 0.0), 0.0, 1e-14);
        double prev = 0.0;
        for (int k = 1; k <= 60; ++k) {
            const double lambda = std::pow(2.0, 0.25 * k - 5.0);
            const double v = laplace_exponent(s, lambda);
            EXPECT_GE(v, prev);
            prev = v;
            if (lambda >= 1.0) {
                EXPECT_GE(v, 0.05 * std::pow(lambda, 0.5 * subordinator_alpha(s)));
            }
        }
    }
}

TEST(LevyModel, SymbolOfFullStablePiece) {
    const double c = stable_density_constant(1, 1.3);
    EXPECT_NEAR(power_piece_symbol({c, 1.3, 0.0, kInf}, 1, 2.0), std::pow(2.0, 1.3), 1e-14);
    // Splitting the support at any radius leaves the symbol unchanged.
    const double split = power_piece_symbol({c, 1.3, 0.0, 0.6}, 1, 2.0) + power_piece_symbol({c, 1.3, 0.6, kInf}, 1, 2.0);
    EXPECT_NEAR(split, std::pow(2.0, 1.3), 1e-10);
}

TEST(LevyModel, TruncatedStableSymbol) {
    // 2c∫_0^1 (1 − cos 1.5r) r^{−2.2} dr, mpmath.
    EXPECT_NEAR(symbol_re({TruncatedStable{1.2, 1}, {}}, {1.5}), 0.88998951851216979, 1e-9);
    // 2-d: c ω_2 ∫_0^1 (1 − J_0(√2 r)) r^{−2.5} dr.
    EXPECT_NEAR(symbol_re({TruncatedStable{1.5, 2}, {}}, {1.0, 1.0}), 1.0494000838303589, 1e-9);
}

TEST(LevyModel, StableTypeSymbol) {
    // Closed-form full stable part plus mpmath quadrature of the truncated part.
    EXPECT_NEAR(symbol_re(mixed_stable_type(), {2.0}), 9.2703440030746352, 1e-8);
}

TEST(LevyModel, FamilySymbols) {
    EXPECT_NEAR(symbol_re(isotropic_stable(1.5, 2), {0.6, 0.8}), 1.0, 1e-15);
    EXPECT_NEAR(symbol_re(subordinate_stable(1.0, 1), {2.0}), 2.0, 1e-14);
    EXPECT_NEAR(symbol_re(cylindrical_stable({{1.2, 1}, {1.8, 1}}), {2.0, 3.0}),
                std::pow(2.0, 1.2) + std::pow(3.0, 1.8), 1e-13);
    const double m = 1.0, alpha = 1.2;
    EXPECT_NEAR(symbol_re(subordinate_relativistic(alpha, m, 1), {1.0}),
                std::pow(0.5 + std::pow(m, 2.0 / alpha), 0.5 * alpha) - m, 1e-14);
}

TEST(LevyModel, ValidateRejectsBadParameters) {
    EXPECT_THROW(validate(isotropic_stable(2.0, 1)), InvalidParameter);
    EXPECT_THROW(validate(isotropic_stable(1.0, 0)), InvalidParameter);
    EXPECT_THROW(validate(cylindrical_stable({})), InvalidParameter);
    LevyModel bad = mixed_stable_type();
    std::get<StableTypeDensity>(bad.family).c1 = 1.2;
    EXPECT_THROW(validate(bad), InvalidParameter);
    EXPECT_NO_THROW(validate(mixed_stable_type()));
}

TEST(LevyModel, StableTypeEnvelopeHoldsOnGrid) {
    const LevyModel model = mixed_stable_type();
    const auto& m = std::get<StableTypeDensity>(model.family);
    for (int k = 0; k <= 200; ++k) {
        const double r = std::pow(2.0, -k / 8.0);
        EXPECT_LE(m.c1 * std::pow(r, -1 - m.alpha1), m.kappa(r) * (1 + 1e-14));
        EXPECT_GE(m.c2 * std::pow(r, -1 - m.alpha2), m.kappa(r) * (1 - 1e-14));
    }
}

TEST(LevyModel, DecompositionReassemblesDensity) {
    const LevyModel model = mixed_stable_type();
    const auto& m = std::get<StableTypeDensity>(model.family);
    const auto dec = decompose(m);
    for (double r : {1e-4, 0.01, 0.3, 0.999, 1.0, 1.5, 10.0}) {
        EXPECT_GE(dec.nu0(r) + dec.nu1(r), 0.0);
        EXPECT_NEAR(dec.nu0(r) + dec.nu1(r) + dec.nu2(r), m.kappa(r), 1e-12 * m.kappa(r));
        EXPECT_GE(dec.nu2(r), -1e-12 * m.kappa(r));
    }
    EXPECT_NEAR(dec.total_variation_nu0, 2.0 / 0.8, 1e-14);
}

TEST(SmallJumpMoment, PowerDensityClosedForm) {
    // 2∫_0^1 r^{2γ−1−α} dr = 2/(2γ − α) for κ = |z|^{−2}, γ = 0.75.
    const auto v = small_jump_moment(stable_type_power(1.0, 1.0, 1), 0.75);
    ASSERT_TRUE(v.has_value());
    EXPECT_NEAR(*v, 4.0, 1e-9);
    // The canonical Cauchy density carries the constant 1/π.
    EXPECT_NEAR(*small_jump_moment(isotropic_stable(1.0, 1), 0.75), 4.0 / std::numbers::pi, 1e-9);
}

TEST(SmallJumpMoment, GammaOneIsAlwaysFinite) {
    const LevyModel models[] = {isotropic_stable(1.9, 2), subordinate_stable(1.2, 1),
                                subordinate_relativistic(1.5, 1.0, 1), mixed_stable_type(),
                                {TruncatedStable{1.7, 3}, {}}, cylindrical_stable({{1.2, 1}, {1.8, 2}})};
    for (const auto& m : models) EXPECT_TRUE(small_jump_moment(m, 1.0).has_value()) << m.family_name();
}

TEST(SmallJumpMoment, CylindricalDivergesBelowMaxIndex) {
    EXPECT_FALSE(small_jump_moment(cylindrical_stable({{1.2, 1}, {1.8, 1}}), 0.8).has_value());
    EXPECT_TRUE(small_jump_moment(cylindrical_stable({{1.2, 1}, {1.8, 1}}), 0.95).has_value());
}

TEST(SmallJumpMoment, DivergenceDetectedForRadialModels) {
    EXPECT_FALSE(small_jump_moment(isotropic_stable(1.5, 1), 0.7).has_value());
    EXPECT_FALSE(small_jump_moment(isotropic_stable(1.5, 1), 0.75).has_value());
    EXPECT_FALSE(small_jump_moment(mixed_stable_type(), 0.65).has_value());
    EXPECT_TRUE(small_jump_moment(mixed_stable_type(), 0.75).has_value());
    EXPECT_FALSE(small_jump_moment(subordinate_relativistic(1.2, 1.0, 1), 0.5).has_value());
}

TEST(SmallJumpMoment, RelativisticMatchesDirectQuadrature) {
    // 2∫_0^1 r^{1.6} κ(r) dr for α = 1.2, m = 1, integrated with scipy in log-radius.
    const auto v = small_jump_moment(subordinate_relativistic(1.2, 1.0, 1), 0.8);
    ASSERT_TRUE(v.has_value());
    EXPECT_NEAR(*v, 0.95703173924046, 1e-8);
}

TEST(SmallJumpMoment, NonincreasingInGamma) {
    const LevyModel models[] = {isotropic_stable(1.2, 1), mixed_stable_type(), subordinate_relativistic(1.0, 2.0, 2)};
    for (const auto& m : models) {
        double prev = std::numeric_limits<double>::infinity();
        for (double g = 0.75; g <= 1.0; g += 0.05) {
            const auto v = small_jump_moment(m, g);
            ASSERT_TRUE(v.has_value());
            EXPECT_LE(*v, prev * (1 + 1e-9));
            prev = *v;
        }
    }
}

TEST(Hypothesis, ExampleFamilies) {
    const auto rel = hypothesis_params(subordinate_relativistic(1.3, 1.0, 1));
    EXPECT_EQ(rel.alpha, 1.3);
    EXPECT_EQ(rel.alpha_bar, 1.0);
    EXPECT_EQ(rel.delta, 1.0);

    const auto cyl = hypothesis_params(cylindrical_stable({{0.9, 1}, {1.0, 1}}));
    EXPECT_DOUBLE_EQ(cyl.alpha, 0.9);
    EXPECT_DOUBLE_EQ(cyl.alpha_bar, 0.9);
    EXPECT_DOUBLE_EQ(cyl.delta, 0.9);
    EXPECT_FALSE(cyl.subcritical);

    const auto iso = hypothesis_params(isotropic_stable(1.5, 2));
    EXPECT_EQ(iso.alpha, 1.5);
    EXPECT_EQ(iso.alpha_bar, 1.0);
    EXPECT_EQ(iso.delta, 1.0);
    EXPECT_TRUE(iso.subcritical);
    EXPECT_FALSE(iso.k0.has_value());

    const auto cyl_sub = hypothesis_params(cylindrical_stable({{1.2, 1}, {1.8, 1}}));
    EXPECT_DOUBLE_EQ(cyl_sub.alpha, 1.2);
    EXPECT_TRUE(cyl_sub.subcritical);
    EXPECT_DOUBLE_EQ(cyl_sub.alpha_eff, 1.8);

    EXPECT_THROW(hypothesis_params({SubordinateBM{IdentitySub{}, 1}, {}}), UnsupportedModel);
}

TEST(AdmissibleBeta, Examples) {
    EXPECT_NEAR(admissible_beta(stable_type_power(1.5, 1.0, 1)).lo, 0.25, 1e-15);
    EXPECT_NEAR(admissible_beta(cylindrical_stable({{0.8, 1}, {0.8, 2}})).lo, 0.6, 1e-15);
    EXPECT_NEAR(admissible_beta(cylindrical_stable({{0.7, 1}, {0.7, 1}})).lo, 0.65, 1e-15);
    EXPECT_EQ(admissible_beta(isotropic_stable(1.5, 1)).hi, 1.0);
}

TEST(AdmissibleBeta, StructuralConstraints) {
    // α ≤ 2/3 can never satisfy α_max < 2α²/(2−α).
    EXPECT_THROW(admissible_beta(cylindrical_stable({{0.6, 1}, {0.6, 1}})), InadmissibleModel);
    // α = 0.9: 2α²/(2−α) = 1.4727.
    EXPECT_NO_THROW(admissible_beta(cylindrical_stable({{0.9, 1}, {1.45, 1}})));
    EXPECT_THROW(admissible_beta(cylindrical_stable({{0.9, 1}, {1.5, 1}})), InadmissibleModel);
    // Stable-type needs α2 < 2α1.
    LevyModel wide = mixed_stable_type();
    auto& st = std::get<StableTypeDensity>(wide.family);
    st.alpha1 = 0.75;
    st.kappa.pieces[0].alpha = 0.75;
    EXPECT_NO_THROW(admissible_beta(wide));
    st.alpha2 = 1.55;
    EXPECT_THROW(admissible_beta(wide), InadmissibleModel);
}

TEST(AdmissibleBeta, AgreesWithHypothesisParams) {
    for (double a1 = 0.55; a1 < 2.0; a1 += 0.1)
        for (double a2 = a1; a2 < 2.0; a2 += 0.1) {
            const auto model = cylindrical_stable({{a1, 1}, {a2, 1}});
            const auto hp = hypothesis_params(model);
            const double lo = beta_floor(hp, hp.gamma_floor);
            const bool theory_ok = hp.subcritical ? lo < 1.0 : lo < hp.alpha_bar;
            bool admissible = true;
            try {
                const auto iv = admissible_beta(model);
                EXPECT_LT(iv.lo, 1.0);
            } catch (const InadmissibleModel&) {
                admissible = false;
            }
            EXPECT_EQ(admissible, theory_ok) << a1 << " " << a2;
        }
}
