#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "symdistill/parse.hpp"
#include "symdistill/synth.hpp"

using namespace symdistill;

TEST(Synth, SpringRestsAtUnitLength)
{
    const auto f = pairwise_force(ForceKind::Spring, 0.6, 0.8, 1.0, 1.0, 1.0, 1.0);
    EXPECT_NEAR(std::hypot(f[0], f[1]), 0.0, 1e-15);
    const auto g = pairwise_force(ForceKind::Spring, 0.6, 0.8, 1.0 + 1e-2, 1.0, 1.0, 1.0);
    EXPECT_LT(std::hypot(g[0], g[1]), 1e-2);
}

TEST(Synth, ChargeIsAntisymmetric)
{
    const auto a = pairwise_force(ForceKind::Charge, 1.0, -2.0, 2.3, 1.0, 0.5, -0.7);
    const auto b = pairwise_force(ForceKind::Charge, 1.0, -2.0, 2.3, 1.0, -0.5, -0.7);
    EXPECT_EQ(a[0], -b[0]);
    EXPECT_EQ(a[1], -b[1]);
}

TEST(Synth, InverseSquareHandValue)
{
    const auto f = pairwise_force(ForceKind::InvR2, 3.0, 4.0, 5.0, 2.0, 0.0, 0.0);
    EXPECT_NEAR(f[0], 0.048, 1e-15);
    EXPECT_NEAR(f[1], 0.064, 1e-15);
}

TEST(Synth, HeatValues)
{
    EXPECT_EQ(heat_solution(0.0, 0.7, 0.2), 0.0);
    EXPECT_NEAR(heat_solution(0.5, 0.0, 0.2), 1.0, 1e-15);
    EXPECT_NEAR(heat_solution(0.5, 1.0, 0.2), 0.13890, 2e-5);
    EXPECT_NEAR(heat_solution(0.5, 1.0, 0.2), std::exp(-0.2 * std::numbers::pi * std::numbers::pi), 1e-15);
}

TEST(Synth, PairwiseMatchesDefiningFormulas)
{
    const std::vector<std::string> names{"dx", "dy", "r", "m1", "m2", "q1", "q2"};
    const struct {
        ForceKind kind;
        const char* fx;
        const char* fy;
    } laws[] = {
        {ForceKind::Spring, "(((1 - r) * inv(r)) * dx)", "(((1 - r) * inv(r)) * dy)"},
        {ForceKind::InvR, "(dx * inv((r * r)))", "(dy * inv((r * r)))"},
        {ForceKind::InvR2, "((m2 * dx) * inv(((r * r) * r)))", "((m2 * dy) * inv(((r * r) * r)))"},
        {ForceKind::Charge, "(((q1 * q2) * dx) * inv(((r * r) * r)))", "(((q1 * q2) * dy) * inv(((r * r) * r)))"},
    };
    for (const auto& law : laws) {
        Rng rng(5);
        const auto t = gen_pairwise(ForceLaw{law.kind, 1e-2}, 2000, rng);
        EXPECT_EQ(t.input_names, names);
        const auto fx = eval_batch(parse(law.fx, names), t.x);
        const auto fy = eval_batch(parse(law.fy, names), t.x);
        for (std::size_t i = 0; i < t.rows(); ++i) {
            ASSERT_NEAR(fx[i], t.y(i, 0), 1e-12 * std::max(1.0, std::abs(fx[i])));
            ASSERT_NEAR(fy[i], t.y(i, 1), 1e-12 * std::max(1.0, std::abs(fy[i])));
        }
    }
}

TEST(Synth, SamplingRanges)
{
    Rng rng(6);
    const double soft = 0.05;
    const auto t = gen_pairwise(ForceLaw{ForceKind::Charge, soft}, 5000, rng);
    for (std::size_t i = 0; i < t.rows(); ++i) {
        const double dx = t.x(i, 0);
        const double dy = t.x(i, 1);
        EXPECT_GE(t.x(i, 2), 0.1 + soft);
        EXPECT_DOUBLE_EQ(t.x(i, 2), std::sqrt(dx * dx + dy * dy) + soft);
        for (std::size_t c : {3u, 4u}) {
            EXPECT_GE(t.x(i, c), 0.5);
            EXPECT_LE(t.x(i, c), 2.0);
        }
        for (std::size_t c : {5u, 6u}) {
            EXPECT_GE(std::abs(t.x(i, c)), 0.1);
            EXPECT_LE(std::abs(t.x(i, c)), 1.0);
        }
        EXPECT_TRUE(std::isfinite(t.y(i, 0)) && std::isfinite(t.y(i, 1)));
    }
}

TEST(Synth, SeededGeneratorsRepeat)
{
    Rng a(9);
    Rng b(9);
    const auto ta = gen_heat(300, 0.2, a);
    const auto tb = gen_heat(300, 0.2, b);
    EXPECT_EQ(ta.x.values(), tb.x.values());
    EXPECT_EQ(ta.y.values(), tb.y.values());
    for (std::size_t i = 0; i < ta.rows(); ++i) {
        EXPECT_EQ(ta.y(i, 0), heat_solution(ta.x(i, 0), ta.x(i, 1), 0.2));
    }
}

TEST(Synth, Errors)
{
    Rng rng(1);
    EXPECT_THROW((void)gen_heat(10, 0.0, rng), ConfigError);
    EXPECT_THROW((void)gen_pairwise(ForceLaw{ForceKind::Spring, -1.0}, 10, rng), ConfigError);
    EXPECT_THROW((void)force_kind_from_name("gravity"), ConfigError);
    EXPECT_EQ(force_kind_from_name("inv_r2"), ForceKind::InvR2);
}
