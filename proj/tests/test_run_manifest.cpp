#include <gtest/gtest.h>

#include "symdistill/run_manifest.hpp"
#include "test_util.hpp"

using namespace symdistill;

TEST(RunManifest, ConfigRoundTrip)
{
    SRConfig c;
    c.ops = OperatorSet::from_names({"+", "*", "inv", "sin", "exp"});
    c.ops.at(OpCode::Exp).arg_complexity_limit = 3;
    c.ops.at(OpCode::Sin).complexity = 2;
    c.parsimony = 0.01;
    c.n_iterations = 123;
    c.seed = 42;
    c.loss = LossKind::MAE;
    c.acceptance_temperature = 2.5;
    c.optimizer.max_evaluations = 77;
    c.child_optimizer.max_evaluations = 12;
    c.child_opt_probability = 0.5;
    c.tuning_rows = 0;
    c.adaptive_parsimony = 0.0;
    const auto j = config_to_json(c);
    const auto back = config_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(config_to_json(back).dump(), j.dump());
    EXPECT_EQ(back.ops.at(OpCode::Exp).arg_complexity_limit, 3);
    EXPECT_EQ(back.ops.at(OpCode::Sin).complexity, 2);
    EXPECT_EQ(back.seed, 42u);
    EXPECT_EQ(back.loss, LossKind::MAE);
    EXPECT_EQ(back.child_optimizer.max_evaluations, 12);
    EXPECT_EQ(back.tuning_rows, 0u);
    EXPECT_EQ(back.adaptive_parsimony, 0.0);
}

TEST(RunManifest, PartialJsonKeepsDefaults)
{
    const auto c = config_from_json(nlohmann::json::parse(R"({"n_iterations": 5})"));
    EXPECT_EQ(c.n_iterations, 5);
    EXPECT_EQ(c.population_size, SRConfig{}.population_size);
}

TEST(RunManifest, BadConfigRejected)
{
    EXPECT_THROW((void)config_from_json(nlohmann::json::parse(R"({"ops": [{"name": "tan"}]})")), ConfigError);
    EXPECT_THROW((void)config_from_json(nlohmann::json::parse(R"({"n_populations": 0})")), ConfigError);
    EXPECT_THROW((void)config_from_json(nlohmann::json::parse(R"({"loss": "huber"})")), ConfigError);
    EXPECT_THROW((void)config_from_json(nlohmann::json::parse(R"({"adaptive_parsimony": -1})")), ConfigError);
    EXPECT_THROW((void)config_from_json(nlohmann::json::parse(R"({"parsimony": "lots"})")), ConfigError);
    EXPECT_THROW((void)config_from_json(nlohmann::json::parse(R"({"child_opt_probability": 1.5})")), ConfigError);
}

TEST(RunManifest, WritesWithoutTimestamps)
{
    TempDir dir;
    RunManifest m;
    m.subcommand = "gen";
    m.seed = 3;
    m.inputs = {"a.csv"};
    m.extra["kind"] = "heat";
    m.write(dir.path());
    const auto first = slurp(dir.path() / "run_manifest.json");
    m.write(dir.path());
    EXPECT_EQ(slurp(dir.path() / "run_manifest.json"), first);
    const auto j = nlohmann::json::parse(first);
    EXPECT_EQ(j.at("subcommand"), "gen");
    EXPECT_EQ(j.at("kind"), "heat");
    EXPECT_EQ(j.at("version"), kVersion);
}
