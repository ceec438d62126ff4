#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "errors.hpp"
#include "expr.hpp"
#include "loss.hpp"

namespace symdistill {

struct ConstantOptimizerOptions {
    int max_evaluations = 200; // per start
    int restarts = 2;
};

// Relative frequencies of the mutation kinds.
struct MutationWeights {
    double perturb_constant = 1.0;
    double replace_node = 1.0;
    double insert_node = 2.0;
    double delete_subtree = 1.0;
};

struct SRConfig {
    OperatorSet ops = OperatorSet::defaults();
    int n_populations = 8;
    int population_size = 50;
    int n_iterations = 400;
    int tournament_size = 2;
    double tournament_p = 0.9;
    double parsimony = 0.0;
    int max_complexity = 25;
    int migration_interval = 10;
    double migration_fraction = 0.1;
    int constant_opt_interval = 1;
    // Chance that a given member has its constants optimized at an optimization round.
    double constant_opt_probability = 0.02;
    // Chance that a mutated child has its constants optimized before the acceptance test.
    double child_opt_probability = 1.0;
    // Fraction of populations that tune children at all; the rest search
    // structure with untuned constants.
    double child_opt_fraction = 0.5;
    // Constant tuning during the search sees at most this many rows (0 = all);
    // results are re-scored on the full data.
    std::size_t tuning_rows = 250;
    double acceptance_temperature = 0.1;
    // Ratio between the hottest and the coldest population's temperature.
    double temperature_spread = 100.0;
    double crossover_probability = 0.1;
    std::uint64_t seed = 0;

    LossKind loss = LossKind::MSE;
    // Tournaments rank by loss + parsimony * complexity (true) or by loss alone.
    bool penalized_tournament = true;
    // Tournament scores are multiplied by exp(adaptive_parsimony * share of
    // the population at the member's complexity); 0 disables.
    double adaptive_parsimony = 20.0;
    // Divide the data loss by max(constant-predictor loss, 0.01) inside the fitness.
    bool normalize_loss = true;
    int init_max_depth = 4;
    int mutation_retries = 10;
    // Re-optimize the constants of every front entry once the search ends.
    bool polish_front = true;
    int threads = 1;
    ConstantOptimizerOptions optimizer;
    ConstantOptimizerOptions child_optimizer{50, 0};
    MutationWeights mutation;

    void validate() const
    {
        auto prob = [](double p, const char* name) {
            if (!(p > 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in (0, 1]");
        };
        auto prob0 = [](double p, const char* name) {
            if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
        };
        ops.validate();
        if (n_populations < 1) throw ConfigError("n_populations must be >= 1");
        if (population_size < 2) throw ConfigError("population_size must be >= 2");
        if (n_iterations < 0) throw ConfigError("n_iterations must be >= 0");
        if (tournament_size < 2) throw ConfigError("tournament_size must be >= 2");
        prob(tournament_p, "tournament_p");
        if (!(parsimony >= 0.0)) throw ConfigError("parsimony must be nonnegative");
        if (max_complexity < 3) throw ConfigError("max_complexity must be >= 3");
        if (migration_interval < 1) throw ConfigError("migration_interval must be >= 1");
        prob0(migration_fraction, "migration_fraction");
        if (constant_opt_interval < 1) throw ConfigError("constant_opt_interval must be >= 1");
        prob0(constant_opt_probability, "constant_opt_probability");
        prob0(child_opt_probability, "child_opt_probability");
        prob0(child_opt_fraction, "child_opt_fraction");
        if (!(acceptance_temperature > 0.0)) throw ConfigError("acceptance_temperature must be positive");
        if (!(temperature_spread >= 1.0) || !std::isfinite(temperature_spread)) {
            throw ConfigError("temperature_spread must be >= 1");
        }
        if (!(adaptive_parsimony >= 0.0) || !std::isfinite(adaptive_parsimony)) {
            throw ConfigError("adaptive_parsimony must be finite and >= 0");
        }
        prob0(crossover_probability, "crossover_probability");
        if (init_max_depth < 1) throw ConfigError("init_max_depth must be >= 1");
        if (mutation_retries < 1) throw ConfigError("mutation_retries must be >= 1");
        if (optimizer.max_evaluations < 1 || optimizer.restarts < 0) throw ConfigError("bad optimizer budget");
        if (child_optimizer.max_evaluations < 1 || child_optimizer.restarts < 0) {
            throw ConfigError("bad child optimizer budget");
        }
        if (threads < 1) throw ConfigError("threads must be >= 1");
    }
};

} // namespace symdistill
