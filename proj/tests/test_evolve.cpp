#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "symdistill/evolve.hpp"
#include "symdistill/parse.hpp"

using namespace symdistill;

namespace {

SRConfig small_config(std::uint64_t seed)
{
    SRConfig c;
    c.n_populations = 4;
    c.population_size = 30;
    c.n_iterations = 50;
    c.seed = seed;
    return c;
}

Matrix uniform_inputs(std::size_t n, std::size_t d, std::uint64_t seed, double lo, double hi)
{
    Rng rng(seed);
    Matrix m(n, d);
    for (auto& v : m.values()) v = rng.uniform(lo, hi);
    return m;
}

double best_loss(const ParetoFront& f)
{
    double b = std::numeric_limits<double>::infinity();
    for (const auto& e : f.entries()) b = std::min(b, e.loss);
    return b;
}

} // namespace

TEST(Evolve, ConstantTarget)
{
    const auto x = uniform_inputs(100, 1, 1, -1.0, 1.0);
    const std::vector<double> y(100, 0.08);
    const auto r = evolve(x, y, small_config(1));
    ASSERT_FALSE(r.front.empty());
    EXPECT_EQ(r.front[0].complexity, 1);
    EXPECT_LT(r.front[0].loss, 1e-20);
    EXPECT_NEAR(eval_point(r.front[0].expr, x.row(0)), 0.08, 1e-10);
}

TEST(Evolve, LinearTargetWithPlusTimes)
{
    const auto x = uniform_inputs(100, 1, 2, -2.0, 2.0);
    std::vector<double> y(100);
    for (std::size_t i = 0; i < 100; ++i) y[i] = 2.0 * x(i, 0);
    auto c = small_config(2);
    c.ops = OperatorSet::from_names({"+", "*"});
    const auto r = evolve(x, y, c);
    bool found = false;
    for (const auto& e : r.front.entries()) found = found || (e.loss < 1e-10 && e.complexity <= 3);
    EXPECT_TRUE(found);
}

TEST(Evolve, ProductPlusSine)
{
    const auto x = uniform_inputs(200, 2, 3, -2.0, 2.0);
    std::vector<double> y(200);
    for (std::size_t i = 0; i < 200; ++i) y[i] = x(i, 0) * x(i, 1) + std::sin(x(i, 0));
    auto c = small_config(3);
    c.n_populations = 8;
    c.population_size = 50;
    c.n_iterations = 200;
    const auto r = evolve(x, y, c);
    EXPECT_LT(best_loss(r.front), 1e-6);
}

TEST(Evolve, ResultIndependentOfThreadCount)
{
    const auto x = uniform_inputs(80, 2, 4, 0.5, 2.0);
    std::vector<double> y(80);
    for (std::size_t i = 0; i < 80; ++i) y[i] = x(i, 0) / x(i, 1) + 0.3;
    auto c = small_config(4);
    c.n_iterations = 30;
    c.threads = 1;
    const auto a = evolve(x, y, c);
    c.threads = 4;
    const auto b = evolve(x, y, c);
    EXPECT_TRUE(a.front == b.front);
    EXPECT_EQ(a.stats.evaluations, b.stats.evaluations);
    c.seed = 5;
    const auto other = evolve(x, y, c);
    EXPECT_EQ(other.front.is_valid(), true);
}

TEST(Evolve, HistoryAndFrontInvariants)
{
    const auto x = uniform_inputs(100, 3, 5, 0.2, 3.0);
    std::vector<double> y(100);
    for (std::size_t i = 0; i < 100; ++i) y[i] = std::exp(0.5 * x(i, 0)) * x(i, 2) - 1.0 / x(i, 1);
    auto c = small_config(6);
    c.parsimony = 0.001;
    c.max_complexity = 15;
    c.ops.at(OpCode::Exp).arg_complexity_limit = 3;
    const auto r = evolve(x, y, c);
    ASSERT_EQ(r.stats.best_penalized.size(), 50u);
    for (std::size_t i = 1; i < r.stats.best_penalized.size(); ++i) {
        EXPECT_LE(r.stats.best_penalized[i], r.stats.best_penalized[i - 1]);
    }
    EXPECT_TRUE(r.front.is_valid());
    for (const auto& e : r.front.entries()) {
        EXPECT_EQ(e.complexity, complexity(e.expr, c.ops));
        EXPECT_TRUE(satisfies_constraints(e.expr, c.ops, c.max_complexity)) << render(e.expr);
        const auto pred = eval_batch(e.expr, x);
        double acc = 0.0;
        for (std::size_t i = 0; i < 100; ++i) acc += (pred[i] - y[i]) * (pred[i] - y[i]);
        EXPECT_NEAR(acc / 100.0, e.loss, 1e-9 * std::max(1.0, e.loss));
    }
}

TEST(Evolve, TuningSubsetDoesNotLeakIntoReportedLoss)
{
    const auto x = uniform_inputs(600, 2, 8, -2.0, 2.0);
    std::vector<double> y(600);
    for (std::size_t i = 0; i < 600; ++i) y[i] = 1.7 * x(i, 0) * x(i, 1) + 0.3;
    auto c = small_config(9);
    c.ops = OperatorSet::from_names({"+", "*"});
    c.tuning_rows = 50;
    const auto r = evolve(x, y, c);
    for (const auto& e : r.front.entries()) {
        const auto pred = eval_batch(e.expr, x);
        double acc = 0.0;
        for (std::size_t i = 0; i < 600; ++i) acc += (pred[i] - y[i]) * (pred[i] - y[i]);
        EXPECT_NEAR(acc / 600.0, e.loss, 1e-9 * std::max(1.0, e.loss)) << render(e.expr);
    }
    EXPECT_LT(best_loss(r.front), 1e-10);
}

TEST(Evolve, ChildTuningCanBeDisabled)
{
    const auto x = uniform_inputs(80, 1, 10, -1.0, 1.0);
    std::vector<double> y(80);
    for (std::size_t i = 0; i < 80; ++i) y[i] = 2.0 * x(i, 0);
    auto c = small_config(3);
    c.ops = OperatorSet::from_names({"+", "*"});
    c.child_opt_probability = 0.0;
    c.constant_opt_probability = 0.0;
    c.polish_front = false;
    const auto a = evolve(x, y, c);
    c.child_opt_probability = 1.0;
    const auto b = evolve(x, y, c);
    EXPECT_LT(a.stats.evaluations, b.stats.evaluations);
    EXPECT_TRUE(a.front.is_valid());
}

TEST(ProblemTest, SubsetKeepsRowsAndWeights)
{
    const auto x = Matrix::from_rows({{0.0}, {1.0}, {2.0}, {3.0}});
    const Problem p(x, {0.0, 1.0, 4.0, 9.0}, {1.0, 2.0, 3.0, 4.0});
    const std::vector<std::size_t> rows{3, 1};
    const auto s = p.subset(rows);
    ASSERT_EQ(s.rows(), 2u);
    EXPECT_EQ(s.x().column(0)[0], 3.0);
    EXPECT_EQ(s.y()[1], 1.0);
    // Weights 4 and 2 after rescaling: (4 * 1 + 2 * 0) / 6.
    const std::vector<double> pred{8.0, 1.0};
    EXPECT_NEAR(s.loss_of(pred), 4.0 / 6.0, 1e-15);
}

TEST(Seeds, DerivedStreamsAreDistinct)
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t base = 0; base < 64; ++base) {
        for (std::uint64_t k = 0; k < 16; ++k) seen.insert(derive_seed(base, k));
    }
    EXPECT_EQ(seen.size(), 64u * 16u);
    EXPECT_EQ(derive_seed(5, 2), derive_seed(5, 2));
}

TEST(Evolve, NonFiniteTargetRejected)
{
    const auto x = uniform_inputs(10, 1, 7, 0.0, 1.0);
    std::vector<double> y(10, 1.0);
    y[3] = std::nan("");
    EXPECT_THROW((void)evolve(x, y, small_config(1)), StructuralError);
}

TEST(Evolve, InvalidConfigRejected)
{
    const auto x = uniform_inputs(10, 1, 7, 0.0, 1.0);
    const std::vector<double> y(10, 1.0);
    auto c = small_config(1);
    c.population_size = 1;
    EXPECT_THROW((void)evolve(x, y, c), ConfigError);
}
