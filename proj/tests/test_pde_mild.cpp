#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "levyflow/drift.hpp"
#include "levyflow/errors.hpp"
#include "levyflow/pde_mild.hpp"

using namespace levyflow;

namespace {

constexpr double kPi = std::numbers::pi;

// Torus on which sin(x₁) is periodic and no cutoff is needed.
SpaceTimeGrid sine_grid(int dim = 1, int points = 512, int steps = 256) {
    SpaceTimeGrid g;
    g.dim = dim;
    g.points = points;
    g.steps = steps;
    g.half_width = 5.0 * kPi;
    g.cutoff_width = 0.0;
    return g;
}

double closed_form(double lambda, double t, double x) {
    return std::sin(x) * (1.0 - std::exp(-(lambda + 1.0) * (1.0 - t))) / (lambda + 1.0);
}

double node_x(const SpaceTimeGrid& g, std::size_t i) { return -g.half_width + g.spacing() * static_cast<double>(i); }

} // namespace

TEST(Mollifier, UnitMass) {
    // 2∫_0^1 c₁(1−r²)³ dr and 2π∫_0^1 c₂ r(1−r²)³ dr.
    EXPECT_NEAR(2.0 * mollifier_constant(1) * 16.0 / 35.0, 1.0, 1e-15);
    EXPECT_NEAR(2.0 * kPi * mollifier_constant(2) / 8.0, 1.0, 1e-15);
}

TEST(Mollifier, PreservesAffineFields) {
    DriftSpec lin;
    lin.shape = DriftShape::Linear;
    lin.amplitude = 0.8;
    lin.center = {0.3};
    const auto moll = mollify_drift(lin, 4);
    for (double x = -3.0; x <= 3.0; x += 0.37) {
        const double p = x;
        EXPECT_NEAR(moll.profile(std::span<const double>(&p, 1))[0], 0.8 * (x - 0.3), 1e-12) << x;
    }
    lin.dim = 2;
    lin.center = {0.3, -0.1};
    const auto moll2 = mollify_drift(lin, 3);
    const std::vector<double> x{0.4, 1.2};
    const auto v = moll2.profile(x);
    EXPECT_NEAR(v[0], 0.8 * 0.1, 1e-12);
    EXPECT_NEAR(v[1], 0.8 * 1.3, 1e-12);
}

TEST(Mollifier, SupErrorDecaysAtHolderRate) {
    const auto b = capped_power_drift(0.7, 1.0);
    std::vector<double> errs;
    for (int n : {4, 8, 16}) {
        const auto bn = mollify_drift(b, n);
        double worst = 0.0;
        for (int i = -200; i <= 200; ++i) {
            const double x = 0.01 * i;
            const double diff = bn.profile(std::span<const double>(&x, 1))[0] - b.profile(std::span<const double>(&x, 1))[0];
            worst = std::max(worst, std::abs(diff));
        }
        EXPECT_LE(worst, b.holder_constant() * std::pow(n, -0.7));
        errs.push_back(worst);
    }
    for (std::size_t i = 1; i < errs.size(); ++i) EXPECT_NEAR(errs[i] / errs[i - 1], std::pow(2.0, -0.7), 0.02);
}

TEST(Mollifier, DoesNotIncreaseHolderNorm) {
    const auto b = capped_power_drift(0.6, 1.5);
    const auto bn = mollify_drift(b, 5);
    double sup = 0.0, semi = 0.0;
    for (int i = -60; i <= 60; ++i) {
        const double x = 0.05 * i;
        const double vx = bn.profile(std::span<const double>(&x, 1))[0];
        sup = std::max(sup, std::abs(vx));
        for (int j = i + 1; j <= 60; ++j) {
            const double y = 0.05 * j;
            const double vy = bn.profile(std::span<const double>(&y, 1))[0];
            semi = std::max(semi, std::abs(vx - vy) / std::pow(y - x, 0.6));
        }
    }
    EXPECT_LE(sup, b.sup_norm());
    EXPECT_LE(semi, b.holder_constant());
}

TEST(SolveMild, MatchesSineClosedForm) {
    const auto model = isotropic_stable(1.5, 1);
    const auto g = sine_grid();
    const auto sol = solve_mild(model, zero_drift(), sinusoid_drift(1.0), 1.0, g);
    double worst = 0.0;
    for (std::size_t n = 0; n < sol.nodes(); ++n) worst = std::max(worst, std::abs(sol.u_at(0, n, 0) - closed_form(1.0, 0.0, node_x(g, n))));
    EXPECT_LE(worst, 1e-4);
    EXPECT_NEAR(sol.diagnostics.grad_sup, (1.0 - std::exp(-2.0)) / 2.0, 1e-4);
    const double mid = 0.5;
    for (std::size_t n = 0; n < sol.nodes(); n += 17) EXPECT_NEAR(sol.u_at(128, n, 0), closed_form(1.0, mid, node_x(g, n)), 1e-4);
}

TEST(SolveMild, PlaneClosedForm) {
    const auto model = isotropic_stable(1.2, 2);
    const auto g = sine_grid(2, 64, 64);
    auto f = sinusoid_drift(1.0, 1.0, 2);
    const auto sol = solve_mild(model, zero_drift(2), f, 2.0, g);
    double worst = 0.0;
    for (std::size_t n = 0; n < sol.nodes(); ++n) {
        const double x1 = node_x(g, n / 64);
        worst = std::max(worst, std::abs(sol.u_at(0, n, 0) - closed_form(2.0, 0.0, x1)));
        worst = std::max(worst, std::abs(sol.u_at(0, n, 1)));
    }
    EXPECT_LE(worst, 1e-4);
}

TEST(SolveMild, TerminalValueIsZero) {
    const auto model = isotropic_stable(1.5, 1);
    const auto b = capped_power_drift(0.7, 1.0);
    SpaceTimeGrid g;
    g.points = 128;
    g.steps = 64;
    const auto sol = solve_mild(model, b, b, 2.0, g);
    for (std::size_t n = 0; n < sol.nodes(); ++n) EXPECT_EQ(sol.u_at(g.steps, n, 0), 0.0);
}

TEST(SolveMild, ZeroSourceGivesZeroAfterOneSweep) {
    const auto model = isotropic_stable(1.5, 1);
    SpaceTimeGrid g;
    g.points = 128;
    g.steps = 32;
    const auto sol = solve_mild(model, capped_power_drift(0.7, 1.0), zero_drift(), 1.0, g);
    EXPECT_EQ(sol.diagnostics.iterations, 1);
    for (double v : sol.u) EXPECT_EQ(v, 0.0);
    const auto w = weak_residual(sol, model, capped_power_drift(0.7, 1.0), zero_drift());
    EXPECT_EQ(w.max, 0.0);
}

TEST(SolveMild, MaximumPrinciple) {
    const auto b = capped_power_drift(0.7, 1.0);
    SpaceTimeGrid g;
    g.points = 256;
    g.steps = 128;
    for (double alpha : {1.2, 1.5, 1.8})
        for (double lambda : {0.0, 1.0, 8.0}) {
            const auto model = isotropic_stable(alpha, 1);
            auto f = b;
            f.modulation = 0.5;
            const auto sol = solve_mild(model, b, f, lambda, g);
            EXPECT_LE(sol.diagnostics.sup_u, sol.diagnostics.sup_f * (1.0 + 2e-6)) << alpha << " " << lambda;
        }
}

TEST(SolveMild, PicardDifferencesContract) {
    const auto model = isotropic_stable(1.5, 1);
    const auto b = capped_power_drift(0.7, 1.0);
    SpaceTimeGrid g;
    g.points = 256;
    g.steps = 128;
    const auto sol = solve_mild(model, b, b, 1.0, g);
    const auto& d = sol.diagnostics.differences;
    ASSERT_GE(d.size(), 3u);
    EXPECT_LT(d.back(), 1e-6);
    for (std::size_t k = 2; k < d.size(); ++k) EXPECT_LT(d[k] / d[k - 1], 0.7) << k;
}

TEST(SolveMild, ReportsIterationCap) {
    const auto model = isotropic_stable(1.5, 1);
    const auto b = capped_power_drift(0.7, 1.0);
    SpaceTimeGrid g;
    g.points = 64;
    g.steps = 16;
    EXPECT_THROW(solve_mild(model, b, b, 1.0, g, MildOptions{1e-6, 2}), NoConvergence);
}

TEST(SolveMild, HandlesEveryModelFamily) {
    // Without drift each Fourier mode is exact, so sin(x) picks up e^{−ψ(1)}.
    const auto g = sine_grid(1, 128, 128);
    for (const auto& model : {subordinate_stable(1.4, 1), subordinate_relativistic(1.3, 0.5, 1), stable_type_power(1.5, 1.0, 1)}) {
        const auto sol = solve_mild(model, zero_drift(), sinusoid_drift(1.0), 0.0, g);
        const double psi = symbol_re(model, {1.0});
        const double expect = (1.0 - std::exp(-psi)) / psi;
        EXPECT_NEAR(sol.diagnostics.grad_sup, expect, 1e-4) << model.family_name();
    }
}

TEST(GridHolderSeminorm, LinearAndConstantFields) {
    SpaceTimeGrid g;
    g.points = 64;
    std::vector<double> flat(64, 3.0);
    EXPECT_EQ(grid_holder_seminorm(flat, g, 0.5), 0.0);
    std::vector<double> ramp(64);
    for (int i = 0; i < 64; ++i) ramp[i] = std::min(i, 64 - i) * g.spacing();
    // A periodic tent of slope one.
    EXPECT_NEAR(grid_holder_seminorm(ramp, g, 1.0), 1.0, 1e-12);
}

TEST(GridHolderSeminorm, StableUnderRefinement) {
    const auto model = isotropic_stable(1.5, 1);
    const auto b = capped_power_drift(0.7, 1.0);
    SpaceTimeGrid coarse;
    coarse.points = 256;
    coarse.steps = 128;
    SpaceTimeGrid fine = coarse;
    fine.points = 512;
    fine.steps = 256;
    const double s1 = solve_mild(model, b, b, 4.0, coarse, {}, 0.15).diagnostics.grad_seminorm;
    const double s2 = solve_mild(model, b, b, 4.0, fine, {}, 0.15).diagnostics.grad_seminorm;
    EXPECT_GE(s2 / s1, 0.5);
    EXPECT_LE(s2 / s1, 2.0);
}

TEST(ChooseLambda, ClosedFormGradientAtUnitLambda) {
    // ‖∇u‖∞ = (1 − e^{−(λ+1)})/(λ+1) is already below 1/2 at λ = 1.
    const auto model = isotropic_stable(1.5, 1);
    const auto g = sine_grid(1, 256, 128);
    const auto choice = choose_lambda(model, zero_drift(), sinusoid_drift(1.0), 0.5, g);
    ASSERT_GE(choice.lambdas.size(), 3u);
    EXPECT_EQ(choice.lambdas.front(), 1.0);
    EXPECT_NEAR(choice.grad_sups.front(), 0.4323323583816936, 1e-4);
    for (std::size_t i = 0; i < choice.lambdas.size(); ++i) {
        const double l = choice.lambdas[i];
        EXPECT_NEAR(choice.grad_sups[i], (1.0 - std::exp(-(l + 1.0))) / (l + 1.0), 1e-4);
    }
    EXPECT_GT(choice.solution.diagnostics.theta0_fit, 0.0);
}

TEST(ChooseLambda, SmallSourcePassesImmediately) {
    const auto model = isotropic_stable(1.5, 1);
    SpaceTimeGrid g;
    g.points = 256;
    g.steps = 128;
    const auto f = capped_power_drift(0.7, 0.05);
    const auto choice = choose_lambda(model, zero_drift(), f, 0.15, g);
    EXPECT_EQ(choice.lambda, 1.0);
}

TEST(ChooseLambda, CappedPowerDriftFitsPositiveTheta0) {
    const auto b = capped_power_drift(0.7, 1.0);
    SpaceTimeGrid g;
    g.points = 256;
    g.steps = 128;
    for (double alpha : {1.5, 1.8}) {
        const auto choice = choose_lambda(isotropic_stable(alpha, 1), b, b, 0.15, g);
        const auto& d = choice.solution.diagnostics;
        EXPECT_LE(d.grad_sup + d.grad_seminorm, 0.5);
        EXPECT_GT(d.theta0_fit, 0.0) << alpha;
        // Smallest passing power of two.
        for (std::size_t i = 0; i < choice.lambdas.size() && choice.lambdas[i] < choice.lambda; ++i)
            EXPECT_GT(choice.criterion[i], 0.5);
    }
}

TEST(ChooseLambda, FailsWhenTargetUnreachable) {
    const auto b = capped_power_drift(0.7, 1.0);
    SpaceTimeGrid g;
    g.points = 32;
    g.steps = 8;
    EXPECT_THROW(choose_lambda(isotropic_stable(1.5, 1), b, b, 0.15, g, {}, 0.0), LambdaSearchFailure);
}

TEST(WeakResidual, ClosedFormCertificate) {
    const auto model = isotropic_stable(1.5, 1);
    const auto g = sine_grid();
    const auto f = sinusoid_drift(1.0);
    const auto sol = solve_mild(model, zero_drift(), f, 1.0, g);
    const auto w = weak_residual(sol, model, zero_drift(), f);
    ASSERT_EQ(w.defects.size(), 4u);
    EXPECT_LE(w.max, 1e-4);
}

TEST(WeakResidual, HalvesUnderRefinement) {
    const auto model = isotropic_stable(1.5, 1);
    const auto b = capped_power_drift(0.7, 1.0);
    double prev = 0.0;
    for (int r = 0; r < 3; ++r) {
        SpaceTimeGrid g;
        g.points = 128 << r;
        g.steps = 64 << r;
        const auto sol = solve_mild(model, b, b, 4.0, g, {}, 0.15);
        const double w = weak_residual(sol, model, b, b).max;
        if (r > 0) EXPECT_LE(w, prev / 2.0) << r;
        prev = w;
    }
}

TEST(StrongDefect, BoundedByWeakResidualForSmoothData) {
    const auto model = isotropic_stable(1.5, 1);
    SpaceTimeGrid g;
    g.points = 256;
    g.steps = 128;
    const auto b = sinusoid_drift(0.3);
    const auto f = sinusoid_drift(1.0);
    const auto sol = solve_mild(model, b, f, 1.0, g);
    EXPECT_LE(strong_defect(sol, model, b, f), 10.0 * weak_residual(sol, model, b, f).max);
}

TEST(StrongDefect, ClosedFormIsTimeStencilLimited) {
    // Fourth-order stencil error h⁴(λ+1)⁵/30 for the exact solution.
    const auto model = isotropic_stable(1.5, 1);
    const auto f = sinusoid_drift(1.0);
    const auto sol = solve_mild(model, zero_drift(), f, 1.0, sine_grid());
    EXPECT_LE(strong_defect(sol, model, zero_drift(), f), std::pow(1.0 / 256.0, 4) * 32.0 / 30.0 * 1.5);
}
