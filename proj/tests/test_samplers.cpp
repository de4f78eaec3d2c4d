#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "levyflow/errors.hpp"
#include "levyflow/samplers.hpp"
#include "levyflow/stats.hpp"

using namespace levyflow;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cauchy_cdf(double x) { return 0.5 + std::atan(x) / std::numbers::pi; }

LevyModel mixed_stable_type() {
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

TEST(StableSubordinator, LaplaceTransformAtOne) {
    RngStream rng(11, 0);
    const int n = 1000000;
    std::vector<double> v(n);
    for (auto& x : v) x = std::exp(-sample_stable_subordinator(0.5, 1.0, rng));
    const auto e = mean_se(v);
    EXPECT_NEAR(e.value, std::exp(-1.0), 3.0 * e.se);
}

TEST(StableSubordinator, HalfStableMatchesLevyDistribution) {
    // Density (2√π)^{−1} s^{−3/2} e^{−1/(4s)} has CDF erfc(1/(2√s)).
    RngStream rng(12, 0);
    std::vector<double> s(100000);
    for (auto& x : s) x = sample_stable_subordinator(0.5, 1.0, rng);
    const auto ks = ks_test(s, [](double x) { return x <= 0 ? 0.0 : std::erfc(0.5 / std::sqrt(x)); });
    EXPECT_GT(ks.p_value, 0.01);
}

TEST(StableSubordinator, SelfSimilarity) {
    RngStream a(13, 0), b(13, 1);
    const double rho = 0.7, h = 0.2;
    std::vector<double> direct(40000), scaled(40000);
    for (auto& x : direct) x = sample_stable_subordinator(rho, h, a);
    for (auto& x : scaled) x = std::pow(h, 1.0 / rho) * sample_stable_subordinator(rho, 1.0, b);
    EXPECT_GT(ks_test_two_sample(direct, scaled).p_value, 0.01);
}

TEST(StableSubordinator, RelativisticLaplaceTransform) {
    RngStream rng(14, 0);
    const RelativisticSub sub{1.2, 1.0};
    const int n = 200000;
    std::vector<double> v(n);
    for (auto& x : v) x = std::exp(-0.8 * sample_subordinator(sub, 0.5, rng));
    const auto e = mean_se(v);
    EXPECT_NEAR(e.value, std::exp(-0.5 * laplace_exponent(sub, 0.8)), 3.0 * e.se);
}

TEST(SubordinateBm, CauchyAtUnitTime) {
    RngStream rng(21, 0);
    const auto model = subordinate_stable(1.0, 1);
    std::vector<double> z(100000);
    for (auto& x : z) x = sample_subordinated(model, 1.0, rng).z[0];
    EXPECT_GT(ks_test(z, cauchy_cdf).p_value, 0.01);
}

TEST(SubordinateBm, PathEndpointIsCauchy) {
    const auto model = subordinate_stable(1.0, 1);
    std::vector<double> z(20000);
    for (std::size_t i = 0; i < z.size(); ++i) {
        RngStream rng(22, i);
        const auto p = sample_subordinate_bm_path(model, TimeGrid{16}, 0.5, rng);
        z[i] = p.value_at(16)[0];
    }
    EXPECT_GT(ks_test(z, cauchy_cdf).p_value, 0.01);
}

TEST(SubordinateBm, SineCharacteristicIdentity) {
    const auto model = subordinate_relativistic(1.2, 1.0, 1);
    RngStream rng(23, 0);
    const double xi = 1.3, x = 0.7;
    std::vector<double> v(200000);
    for (auto& s : v) s = std::sin(sample_subordinated(model, 1.0, rng).z[0] * xi + x * xi);
    const auto e = mean_se(v);
    const double oracle = std::exp(-laplace_exponent(RelativisticSub{1.2, 1.0}, 0.5 * xi * xi)) * std::sin(x * xi);
    EXPECT_NEAR(e.value, oracle, 3.0 * e.se);
}

TEST(SubordinateBm, IdentityClockGivesBrownianMotion) {
    const LevyModel bm{SubordinateBM{IdentitySub{}, 2}, {}};
    RngStream rng(24, 0);
    const int n = 100000;
    std::vector<double> sq0(n), sq1(n);
    for (int i = 0; i < n; ++i) {
        const auto z = sample_subordinated(bm, 1.0, rng).z;
        sq0[i] = z[0] * z[0];
        sq1[i] = z[1] * z[1];
    }
    const auto e0 = mean_se(sq0), e1 = mean_se(sq1);
    EXPECT_NEAR(e0.value, 1.0, 3.0 * e0.se);
    EXPECT_NEAR(e1.value, 1.0, 3.0 * e1.se);
}

TEST(SubordinateBm, ReconstructionIsBitwise) {
    LevyModel model = subordinate_stable(1.3, 2);
    model.eta = {0.3, -0.1};
    RngStream rng(25, 3);
    const auto p = sample_path(model, TimeGrid{64}, 0.2, rng);
    std::vector<double> big(p.z_incr.size(), 0.0);
    for (const auto& j : p.big_jumps) {
        for (int k = 0; k < p.dim; ++k) big[j.step * p.dim + k] += j.z[k];
        double n2 = 0.0;
        for (double v : j.z) n2 += v * v;
        EXPECT_GT(std::sqrt(n2), p.r0);
    }
    for (int i = 0; i < p.grid.steps; ++i)
        for (int k = 0; k < p.dim; ++k)
            EXPECT_EQ(p.z_incr[i * p.dim + k], p.small[i * p.dim + k] + big[i * p.dim + k] + p.eta_r0[k] * p.grid.h());
    for (const auto& b : p.blocks)
        for (int i = 0; i < p.grid.steps; ++i) EXPECT_LE(b.clock[i], b.clock[i + 1]);
    EXPECT_EQ(p.blocks[0].clock[0], 0.0);
}

TEST(Cylindrical, IndependentCauchyMarginals) {
    const auto model = cylindrical_stable({{1.0, 1}, {1.0, 1}});
    RngStream rng(31, 0);
    const int n = 50000;
    std::vector<double> z1(n), z2(n), prod(n);
    for (int i = 0; i < n; ++i) {
        const auto z = sample_subordinated(model, 1.0, rng).z;
        z1[i] = z[0];
        z2[i] = z[1];
        prod[i] = std::atan(z[0]) * std::atan(z[1]);
    }
    EXPECT_GT(ks_test(z1, cauchy_cdf).p_value, 0.01);
    EXPECT_GT(ks_test(z2, cauchy_cdf).p_value, 0.01);
    const auto c = mean_se(prod);
    EXPECT_LT(std::abs(c.value), 3.0 * c.se);
}

TEST(Cylindrical, SingleBlockMatchesSubordinateBmBitwise) {
    const auto cyl = cylindrical_stable({{1.4, 2}});
    const auto sub = subordinate_stable(1.4, 2);
    RngStream a(32, 5), b(32, 5);
    const auto pc = sample_cylindrical_path(cyl, TimeGrid{32}, 0.3, a);
    const auto ps = sample_subordinate_bm_path(sub, TimeGrid{32}, 0.3, b);
    EXPECT_EQ(pc.z_incr, ps.z_incr);
    EXPECT_EQ(pc.blocks[0].clock, ps.blocks[0].clock);
    EXPECT_EQ(pc.blocks[0].bm, ps.blocks[0].bm);
}

TEST(Cylindrical, FractionalMomentStabilises) {
    const auto model = cylindrical_stable({{1.2, 1}, {1.8, 1}});
    auto moment = [&](int n, std::uint64_t tag) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) {
            RngStream rng(33, stream_id(tag, i));
            v[i] = std::pow(std::abs(sample_subordinated(model, 1.0, rng).z[0]), 0.5);
        }
        return mean_se(v);
    };
    const auto m1 = moment(50000, 1), m2 = moment(100000, 2);
    EXPECT_NEAR(m1.value, m2.value, 3.0 * std::hypot(m1.se, m2.se));
    EXPECT_LT(m2.se, m1.se);
}

TEST(StableType, BigJumpCountIsPoisson) {
    const auto model = stable_type_power(1.2, 1.0, 1);
    const double mean = (2.0 / 1.2) * std::pow(0.25, -1.2);
    const int n = 20000;
    std::vector<double> counts(n);
    for (int i = 0; i < n; ++i) {
        RngStream rng(41, i);
        counts[i] = static_cast<double>(sample_stable_type_path(model, 0.25, TimeGrid{8}, rng).big_jumps.size());
    }
    const auto e = mean_se(counts);
    EXPECT_NEAR(e.value, mean, 3.0 * e.se);
    EXPECT_NEAR(sample_variance(counts), mean, 0.1 * mean);
}

TEST(StableType, SymmetricSplitKeepsModelDrift) {
    LevyModel model = stable_type_power(1.2, 1.0, 1);
    model.eta = {0.4};
    RngStream rng(42, 0);
    const auto p = sample_stable_type_path(model, 0.25, TimeGrid{8}, rng);
    EXPECT_EQ(p.eta_r0, std::vector<double>{0.4});
}

TEST(StableType, SmallJumpVariance) {
    const auto model = stable_type_power(1.2, 1.0, 1);
    const double r0 = 0.25, expect = 2.0 * std::pow(r0, 0.8) / 0.8;
    RngStream rng(43, 0);
    const auto p = sample_stable_type_path(model, r0, TimeGrid{100000}, rng);
    EXPECT_NEAR(p.small_variance, expect, 1e-14);
    std::vector<double> sq(p.small.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = p.small[i] * p.small[i] / p.grid.h();
    const auto e = mean_se(sq);
    EXPECT_NEAR(e.value, expect, 3.0 * e.se);
    EXPECT_NEAR(p.truncation_bias, 2.0 * std::pow(r0, 1.8) / 1.8, 1e-14);
}

TEST(StableType, ReconstructionAndThreshold) {
    RngStream rng(44, 0);
    const auto p = sample_stable_type_path(mixed_stable_type(), 0.1, TimeGrid{32}, rng);
    std::vector<double> big(p.z_incr.size(), 0.0);
    for (const auto& j : p.big_jumps) {
        big[j.step] += j.z[0];
        EXPECT_GT(std::abs(j.z[0]), 0.1);
        EXPECT_GE(j.time, p.grid.t(j.step));
        EXPECT_LE(j.time, p.grid.t(j.step + 1));
    }
    for (int i = 0; i < p.grid.steps; ++i) EXPECT_EQ(p.z_incr[i], p.small[i] + big[i] + p.eta_r0[0] * p.grid.h());
}

TEST(StableType, EnvelopeFailureOnDegenerateThinning) {
    // κ = 0.01 r^{−2.2} written as a large positive piece minus a nearly equal one.
    StableTypeDensity m;
    m.kappa = RadialDensity{{PowerPiece{1e4, 1.2, 0.0, kInf}, PowerPiece{-9999.99, 1.2, 0.0, kInf}}, 1};
    m.alpha1 = m.alpha2 = 1.2;
    m.c1 = m.c2 = 0.01;
    const LevyModel model{m, {}};
    RngStream rng(45, 0);
    EXPECT_THROW(sample_stable_type_path(model, 0.5, TimeGrid{16}, rng), EnvelopeFailure);
}

TEST(Samplers, ReplayIsIdentical) {
    const LevyModel models[] = {subordinate_stable(1.0, 1), cylindrical_stable({{1.2, 1}, {1.8, 2}}),
                                mixed_stable_type(), subordinate_relativistic(1.5, 1.0, 2)};
    for (const auto& m : models) {
        RngStream a(51, 9), b(51, 9);
        const auto pa = sample_path(m, TimeGrid{32}, 0.2, a);
        const auto pb = sample_path(m, TimeGrid{32}, 0.2, b);
        EXPECT_EQ(pa.z_incr, pb.z_incr);
        EXPECT_EQ(pa.small, pb.small);
        ASSERT_EQ(pa.big_jumps.size(), pb.big_jumps.size());
        for (std::size_t i = 0; i < pa.big_jumps.size(); ++i) EXPECT_EQ(pa.big_jumps[i].z, pb.big_jumps[i].z);
    }
}

TEST(Samplers, CharacteristicFunctionMatrix) {
    struct Case {
        LevyModel model;
        std::vector<double> xi;
    };
    const Case cases[] = {
        {isotropic_stable(1.5, 2), {0.7, -0.4}},
        {subordinate_stable(1.0, 1), {1.0}},
        {subordinate_relativistic(1.2, 1.0, 1), {1.5}},
        {{RelativisticStable{0.9, 2.0, 2}, {}}, {0.5, 1.0}},
        {cylindrical_stable({{1.2, 1}, {1.8, 1}}), {0.8, 0.6}},
        {cylindrical_stable({{0.9, 1}, {1.0, 1}}), {1.0, -0.5}},
        {mixed_stable_type(), {0.7}},
        {{TruncatedStable{1.2, 1}, {}}, {1.5}},
        {{TruncatedStable{1.5, 2}, {}}, {1.0, 1.0}},
    };
    for (const auto& c : cases) {
        const int n = 100000;
        std::vector<double> v(n);
        RngStream rng(52, 0);
        for (int i = 0; i < n; ++i) {
            const auto z = sample_marginal(c.model, 1.0, rng, 0.05);
            double dot = 0.0;
            for (std::size_t k = 0; k < z.size(); ++k) dot += c.xi[k] * z[k];
            v[i] = std::cos(dot);
        }
        const auto e = mean_se(v);
        EXPECT_NEAR(e.value, std::exp(-symbol_re(c.model, c.xi)), 3.0 * e.se) << c.model.family_name();
    }
}

TEST(Samplers, DumpHeaderCarriesSeedAndStream) {
    RngStream rng(777, 12);
    const auto p = sample_path(cylindrical_stable({{1.0, 1}, {1.5, 1}}), TimeGrid{4}, 0.5, rng);
    std::ostringstream os;
    write_path_dump(p, os);
    const std::string s = os.str();
    EXPECT_NE(s.find("master_seed=777"), std::string::npos);
    EXPECT_NE(s.find("stream_id=12"), std::string::npos);
    EXPECT_NE(s.find("t,Z1,Z2,S1,W1_1,S2,W2_1"), std::string::npos);
    int rows = 0;
    for (char ch : s) rows += ch == '\n';
    EXPECT_EQ(rows, 2 + 5);
}
