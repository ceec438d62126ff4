#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "symdistill/slime.hpp"

using namespace symdistill;

namespace {

IOTable line_data()
{
    IOTable t;
    t.input_names = {"x"};
    t.output_names = {"y"};
    t.x = Matrix::from_rows({{5.0}, {-1.0}, {9.0}, {1.0}});
    t.y = Matrix::from_rows({{25.0}, {1.0}, {81.0}, {1.0}});
    return t;
}

SRConfig quick(std::uint64_t seed)
{
    SRConfig c;
    c.n_populations = 3;
    c.population_size = 20;
    c.n_iterations = 25;
    c.seed = seed;
    return c;
}

std::vector<double> square(std::span<const double> z) { return {z[0] * z[0]}; }

} // namespace

TEST(Slime, NearestNeighborsAndDefaultVariance)
{
    SlimeParams p;
    p.x_star = {0.0};
    p.neighbors = 2;
    p.n_synthetic = 1;
    Rng rng(1);
    const auto locale = build_locale(line_data(), p, rng, square);
    ASSERT_EQ(locale.rows(), 3u);
    std::multiset<double> got{locale.x(0, 0), locale.x(1, 0)};
    EXPECT_EQ(got, (std::multiset<double>{-1.0, 1.0}));
    // Default sigma2 = 0.5 * var({-1, 1}) = 1, and the kernel uses it too.
    const double z = locale.x(2, 0);
    EXPECT_NEAR(locale.weights[2], std::exp(-z * z / 1.0), 1e-15);
    EXPECT_EQ(locale.y(2, 0), z * z);
}

TEST(Slime, KernelIsOneAtTheQueryPoint)
{
    SlimeParams p;
    p.x_star = {0.3, -0.2};
    p.neighbors = 1;
    p.n_synthetic = 200;
    p.sigma2 = std::vector<double>{1e-300, 1e-300};
    p.kernel_sigma2 = 1.0;
    IOTable d;
    d.input_names = {"a", "b"};
    d.output_names = {"f"};
    d.x = Matrix::from_rows({{0.0, 0.0}});
    d.y = Matrix::from_rows({{0.0}});
    Rng rng(2);
    const auto locale = build_locale(d, p, rng, [](std::span<const double>) { return std::vector<double>{1.0}; });
    for (std::size_t i = 1; i < locale.rows(); ++i) EXPECT_DOUBLE_EQ(locale.weights[i], 1.0);
}

TEST(Slime, FullDatasetWhenJEqualsRows)
{
    SlimeParams p;
    p.x_star = {0.0};
    p.neighbors = 4;
    Rng rng(3);
    const auto locale = build_locale(line_data(), p, rng);
    EXPECT_EQ(locale.rows(), 4u);
    EXPECT_EQ(locale.weights, std::vector<double>(4, 1.0));
    std::multiset<double> xs(locale.x.values().begin(), locale.x.values().end());
    EXPECT_EQ(xs, (std::multiset<double>{-1.0, 1.0, 5.0, 9.0}));
}

TEST(Slime, NeighborTiesBrokenByRowIndex)
{
    IOTable d;
    d.input_names = {"x"};
    d.output_names = {"y"};
    d.x = Matrix::from_rows({{2.0}, {-2.0}, {2.0}, {-2.0}});
    d.y = Matrix::from_rows({{0.0}, {1.0}, {2.0}, {3.0}});
    const auto idx = nearest_rows(d.x, std::vector<double>{0.0}, 2);
    EXPECT_EQ(idx, (std::vector<std::size_t>{0, 1}));
}

TEST(Slime, Errors)
{
    Rng rng(4);
    SlimeParams p;
    p.x_star = {0.0};
    p.neighbors = 5;
    EXPECT_THROW((void)build_locale(line_data(), p, rng), StructuralError);
    p.neighbors = 0;
    EXPECT_THROW((void)build_locale(line_data(), p, rng), ConfigError);
    p.neighbors = 2;
    p.n_synthetic = 3;
    EXPECT_THROW((void)build_locale(line_data(), p, rng), DataError);
    p.n_synthetic = 0;
    p.x_star = {0.0, 1.0};
    EXPECT_THROW((void)build_locale(line_data(), p, rng), ConfigError);

    SlimeParams zero;
    zero.x_star = {0.0};
    zero.neighbors = 2;
    zero.neighbor_weight = 0.0;
    const auto locale = build_locale(line_data(), zero, rng);
    EXPECT_THROW((void)slime_fit(locale, quick(1)), StructuralError);
}

TEST(Slime, ReproducibleWithSeed)
{
    SlimeParams p;
    p.x_star = {1.0};
    p.neighbors = 2;
    p.n_synthetic = 50;
    Rng a(7);
    Rng b(7);
    const auto la = build_locale(line_data(), p, a, square);
    const auto lb = build_locale(line_data(), p, b, square);
    EXPECT_EQ(la.x.values(), lb.x.values());
    EXPECT_EQ(la.weights, lb.weights);
}

TEST(Slime, UniformWeightsMatchPlainEvolve)
{
    IOTable t = line_data();
    t.weights = {1.0, 1.0, 1.0, 1.0};
    const auto weighted = slime_fit(t, quick(9));
    const auto plain = evolve(t.x, t.y.column(0), quick(9));
    EXPECT_TRUE(weighted.fronts[0] == plain.front);
}

TEST(Slime, WeightScalingLeavesFrontUnchanged)
{
    Rng rng(11);
    IOTable t;
    t.input_names = {"x"};
    t.output_names = {"y"};
    t.x = Matrix(60, 1);
    t.y = Matrix(60, 1);
    for (std::size_t i = 0; i < 60; ++i) {
        t.x(i, 0) = rng.uniform(-2.0, 2.0);
        t.y(i, 0) = std::sin(t.x(i, 0)) + 0.1 * t.x(i, 0);
        t.weights.push_back(rng.uniform(0.1, 1.0));
    }
    const auto base = slime_fit(t, quick(12));
    IOTable scaled = t;
    for (auto& w : scaled.weights) w *= 4.0;
    const auto s = slime_fit(scaled, quick(12));
    ASSERT_EQ(s.fronts[0].size(), base.fronts[0].size());
    for (std::size_t i = 0; i < s.fronts[0].size(); ++i) {
        EXPECT_NEAR(s.fronts[0][i].loss, base.fronts[0][i].loss, 1e-12);
    }
    EXPECT_EQ(s.best_index, base.best_index);

    // A non power-of-two factor changes the normalized weights only by rounding.
    std::vector<double> w3 = t.weights;
    for (auto& w : w3) w *= 3.0;
    const Problem p1(t.x, t.y.column(0), t.weights);
    const Problem p3(t.x, t.y.column(0), w3);
    const auto pred = eval_batch(parse("sin(x0)"), t.x);
    EXPECT_NEAR(p1.loss_of(pred), p3.loss_of(pred), 1e-12);
}

TEST(Slime, WeightedLineMatchesLeastSquaresOracle)
{
    Rng rng(13);
    IOTable t;
    t.input_names = {"x"};
    t.output_names = {"y"};
    t.x = Matrix(40, 1);
    t.y = Matrix(40, 1);
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < 40; ++i) {
        const double x = rng.uniform(0.0, 2.0);
        t.x(i, 0) = x;
        t.y(i, 0) = x * x;
        t.weights.push_back(std::exp(-(x - 1.0) * (x - 1.0) / 0.05));
        xs.push_back(x);
        ys.push_back(x * x);
    }
    const auto line = oracle::weighted_line(xs, ys, t.weights);
    const Problem problem(t.x, t.y.column(0), t.weights);
    LossFunction loss(std::make_shared<const Problem>(problem));
    Rng opt_rng(14);
    const auto tuned = optimize_constants(parse("((1 * x0) + 0.5)"), loss, opt_rng, {2000, 2});
    EXPECT_NEAR(tuned.constants()[0], line.slope, 1e-4);
    EXPECT_NEAR(tuned.constants()[1], line.intercept, 1e-4);
}
