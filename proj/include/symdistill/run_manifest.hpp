#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "errors.hpp"
#include "expr.hpp"

namespace symdistill {

inline constexpr const char* kVersion = "0.3.0";

inline nlohmann::ordered_json config_to_json(const SRConfig& c)
{
    nlohmann::ordered_json ops = nlohmann::ordered_json::array();
    for (const auto& op : c.ops.operators()) {
        nlohmann::ordered_json o;
        o["name"] = std::string(op.name());
        o["complexity"] = op.complexity;
        o["arg_complexity_limit"] = op.arg_complexity_limit ? nlohmann::ordered_json(*op.arg_complexity_limit)
                                                            : nlohmann::ordered_json(nullptr);
        ops.push_back(std::move(o));
    }
    nlohmann::ordered_json j;
    j["ops"] = std::move(ops);
    j["n_populations"] = c.n_populations;
    j["population_size"] = c.population_size;
    j["n_iterations"] = c.n_iterations;
    j["tournament_size"] = c.tournament_size;
    j["tournament_p"] = c.tournament_p;
    j["parsimony"] = c.parsimony;
    j["max_complexity"] = c.max_complexity;
    j["migration_interval"] = c.migration_interval;
    j["migration_fraction"] = c.migration_fraction;
    j["constant_opt_interval"] = c.constant_opt_interval;
    j["constant_opt_probability"] = c.constant_opt_probability;
    j["child_opt_probability"] = c.child_opt_probability;
    j["tuning_rows"] = c.tuning_rows;
    j["acceptance_temperature"] = c.acceptance_temperature;
    j["temperature_spread"] = c.temperature_spread;
    j["adaptive_parsimony"] = c.adaptive_parsimony;
    j["child_opt_fraction"] = c.child_opt_fraction;
    j["crossover_probability"] = c.crossover_probability;
    j["seed"] = c.seed;
    j["loss"] = c.loss == LossKind::MSE ? "mse" : "mae";
    j["penalized_tournament"] = c.penalized_tournament;
    j["normalize_loss"] = c.normalize_loss;
    j["init_max_depth"] = c.init_max_depth;
    j["mutation_retries"] = c.mutation_retries;
    j["polish_front"] = c.polish_front;
    j["optimizer"] = {{"max_evaluations", c.optimizer.max_evaluations}, {"restarts", c.optimizer.restarts}};
    j["child_optimizer"] = {
        {"max_evaluations", c.child_optimizer.max_evaluations}, {"restarts", c.child_optimizer.restarts}};
    j["mutation_weights"] = {{"perturb_constant", c.mutation.perturb_constant}, {"replace_node", c.mutation.replace_node},
        {"insert_node", c.mutation.insert_node}, {"delete_subtree", c.mutation.delete_subtree}};
    return j;
}

// Inverse of config_to_json; keys that are absent keep their defaults.
inline SRConfig config_from_json(const nlohmann::json& j)
{
    SRConfig c;
    try {
        if (j.contains("ops")) {
            OperatorSet ops;
            for (const auto& o : j.at("ops")) {
                const auto name = o.at("name").get<std::string>();
                const auto code = op_from_name(name);
                if (!code) throw ConfigError("unknown operator '" + name + "'");
                auto op = make_operator(*code);
                if (o.contains("complexity")) op.complexity = o.at("complexity").get<int>();
                if (o.contains("arg_complexity_limit") && !o.at("arg_complexity_limit").is_null()) {
                    op.arg_complexity_limit = o.at("arg_complexity_limit").get<int>();
                }
                ops.add(op);
            }
            c.ops = std::move(ops);
        }
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("n_populations", c.n_populations);
        get("population_size", c.population_size);
        get("n_iterations", c.n_iterations);
        get("tournament_size", c.tournament_size);
        get("tournament_p", c.tournament_p);
        get("parsimony", c.parsimony);
        get("max_complexity", c.max_complexity);
        get("migration_interval", c.migration_interval);
        get("migration_fraction", c.migration_fraction);
        get("constant_opt_interval", c.constant_opt_interval);
        get("constant_opt_probability", c.constant_opt_probability);
        get("child_opt_probability", c.child_opt_probability);
        get("tuning_rows", c.tuning_rows);
        get("acceptance_temperature", c.acceptance_temperature);
        get("temperature_spread", c.temperature_spread);
        get("adaptive_parsimony", c.adaptive_parsimony);
        get("child_opt_fraction", c.child_opt_fraction);
        get("crossover_probability", c.crossover_probability);
        get("seed", c.seed);
        get("penalized_tournament", c.penalized_tournament);
        get("normalize_loss", c.normalize_loss);
        get("init_max_depth", c.init_max_depth);
        get("mutation_retries", c.mutation_retries);
        get("polish_front", c.polish_front);
        if (j.contains("loss")) {
            const auto l = j.at("loss").get<std::string>();
            if (l == "mse") {
                c.loss = LossKind::MSE;
            } else if (l == "mae") {
                c.loss = LossKind::MAE;
            } else {
                throw ConfigError("unknown loss '" + l + "'");
            }
        }
        auto get_optimizer = [&](const char* key, ConstantOptimizerOptions& opt) {
            if (!j.contains(key)) return;
            const auto& o = j.at(key);
            if (o.contains("max_evaluations")) opt.max_evaluations = o.at("max_evaluations").get<int>();
            if (o.contains("restarts")) opt.restarts = o.at("restarts").get<int>();
        };
        get_optimizer("optimizer", c.optimizer);
        get_optimizer("child_optimizer", c.child_optimizer);
        if (j.contains("mutation_weights")) {
            const auto& w = j.at("mutation_weights");
            if (w.contains("perturb_constant")) c.mutation.perturb_constant = w.at("perturb_constant").get<double>();
            if (w.contains("replace_node")) c.mutation.replace_node = w.at("replace_node").get<double>();
            if (w.contains("insert_node")) c.mutation.insert_node = w.at("insert_node").get<double>();
            if (w.contains("delete_subtree")) c.mutation.delete_subtree = w.at("delete_subtree").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    c.validate();
    return c;
}

// Written next to every CLI output. Holds no timestamps, so repeated runs
// produce identical files.
struct RunManifest {
    std::string subcommand;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::string output_dir;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();

    [[nodiscard]] nlohmann::ordered_json to_json() const
    {
        nlohmann::ordered_json j;
        j["tool"] = "symdistill";
        j["version"] = kVersion;
        j["subcommand"] = subcommand;
        j["seed"] = seed;
        j["inputs"] = inputs;
        j["output_dir"] = output_dir;
        j["config"] = config;
        for (const auto& [k, v] : extra.items()) j[k] = v;
        return j;
    }

    void write(const std::filesystem::path& dir) const
    {
        std::filesystem::create_directories(dir);
        std::ofstream out(dir / "run_manifest.json", std::ios::trunc);
        if (!out) throw DataError("cannot write " + (dir / "run_manifest.json").string());
        out << to_json().dump(2) << "\n";
    }
};

} // namespace symdistill
