#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <thread>
#include <vector>

#include "config.hpp"
#include "constant_opt.hpp"
#include "expr.hpp"
#include "ga_ops.hpp"
#include "loss.hpp"
#include "pareto.hpp"
#include "rng.hpp"
#include "simplify.hpp"

namespace symdistill {

struct EvolveStats {
    std::uint64_t evaluations = 0;
    // Best loss + parsimony * complexity in the hall of fame after each iteration.
    std::vector<double> best_penalized;
    double wall_seconds = 0.0;
};

struct EvolveResult {
    ParetoFront front;
    EvolveStats stats;
};

namespace detail {

// Best individual seen at each complexity level.
class HallOfFame {
public:
    explicit HallOfFame(int max_complexity) : slots_(static_cast<std::size_t>(max_complexity) + 1) {}

    void consider(const Individual& ind)
    {
        if (ind.complexity < 0 || static_cast<std::size_t>(ind.complexity) >= slots_.size()) return;
        if (!std::isfinite(ind.loss)) return;
        auto& slot = slots_[static_cast<std::size_t>(ind.complexity)];
        if (!slot || ind.loss < slot->loss) slot = ind;
    }

    [[nodiscard]] std::vector<Individual> members() const
    {
        std::vector<Individual> out;
        for (const auto& s : slots_) {
            if (s) out.push_back(*s);
        }
        return out;
    }

    // Dominance-filtered members, ascending complexity.
    [[nodiscard]] std::vector<Individual> front() const
    {
        std::vector<Individual> out;
        for (const auto& s : slots_) {
            if (!s) continue;
            if (out.empty() || s->loss < out.back().loss) out.push_back(*s);
        }
        return out;
    }

private:
    std::vector<std::optional<Individual>> slots_;
};

class Population {
public:
    Population(std::uint64_t seed, const SRConfig& config, std::shared_ptr<const Problem> problem,
        double temperature, bool tune_children)
        : config_(&config)
        , temperature_(temperature)
        , tune_children_(tune_children)
        , rng_(seed)
        , loss_(std::move(problem))
        , space_(config, loss_.problem().x().cols())
        , hof_(config.max_complexity)
    {
        const auto& pr = loss_.problem();
        normalizer_ = config.normalize_loss ? std::max(pr.baseline(), 0.01) : 1.0;
        const std::size_t cap = config.tuning_rows;
        if (cap > 0 && pr.rows() > cap) {
            std::vector<std::size_t> rows(pr.rows());
            std::iota(rows.begin(), rows.end(), 0);
            for (std::size_t k = 0; k < cap; ++k) std::swap(rows[k], rows[k + rng_.index(rows.size() - k)]);
            rows.resize(cap);
            std::sort(rows.begin(), rows.end());
            tune_loss_.emplace(std::make_shared<const Problem>(pr.subset(rows)));
        }
    }

    void initialize()
    {
        const auto n = static_cast<std::size_t>(config_->population_size);
        members_.clear();
        members_.reserve(n);
        for (std::size_t v = 0; v < space_.n_variables && members_.size() < n; ++v) {
            members_.push_back(make(Expression::variable(static_cast<std::uint32_t>(v))));
        }
        if (members_.size() < n) members_.push_back(make(Expression::constant(1.0)));
        while (members_.size() < n) {
            members_.push_back(make(random_tree(rng_, space_, config_->init_max_depth)));
        }
    }

    void run_round(int round)
    {
        const auto n = members_.size();
        for (int t = 0; t < config_->population_size; ++t) {
            if (n >= 2 && rng_.bernoulli(config_->crossover_probability)) {
                const auto a = select();
                const auto b = select();
                auto [c1, c2] = crossover(members_[a].expr, members_[b].expr, rng_, space_);
                replace_oldest(make(std::move(c1)));
                replace_oldest(make(std::move(c2)));
                continue;
            }
            const auto w = select();
            auto child_expr = mutate(members_[w].expr, rng_, space_, config_->mutation);
            Individual parent = members_[w];
            if (child_expr == parent.expr) {
                replace_oldest(std::move(parent));
                continue;
            }
            auto child = make(std::move(child_expr));
            if (tune_children_ && child.expr.constant_count() > 0 && rng_.bernoulli(config_->child_opt_probability)) {
                tune(child, config_->child_optimizer);
            }
            if (accept(parent.fitness, child.fitness, temperature_, rng_)) {
                replace_oldest(std::move(child));
            } else {
                replace_oldest(std::move(parent));
            }
        }

        for (auto& m : members_) {
            auto s = simplify(m.expr, config_->ops);
            if (!(s == m.expr) && space_.admits(s)) {
                auto birth = m.birth;
                m = make(std::move(s));
                m.birth = birth;
            }
        }

        if (round % config_->constant_opt_interval == 0 && config_->constant_opt_probability > 0.0) {
            for (auto& m : members_) {
                if (m.expr.constant_count() == 0 || !rng_.bernoulli(config_->constant_opt_probability)) continue;
                tune(m, config_->optimizer);
            }
        }

        best_history_.push_back(best_penalized());
    }

    // Replaces the worst residents with the given migrants.
    void receive(const std::vector<Individual>& migrants)
    {
        if (migrants.empty()) return;
        std::vector<std::size_t> order(members_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return members_[a].fitness > members_[b].fitness; });
        for (std::size_t k = 0; k < migrants.size() && k < order.size(); ++k) {
            members_[order[k]] = migrants[k];
            members_[order[k]].birth = next_birth_++;
        }
    }

    [[nodiscard]] std::vector<Individual> pick_emigrants(const std::vector<Individual>& pool, std::size_t count)
    {
        std::vector<Individual> out;
        if (pool.empty()) return out;
        for (std::size_t k = 0; k < count; ++k) out.push_back(pool[rng_.index(pool.size())]);
        return out;
    }

    [[nodiscard]] const HallOfFame& hall_of_fame() const noexcept { return hof_; }
    [[nodiscard]] const std::vector<Individual>& members() const noexcept { return members_; }
    [[nodiscard]] const std::vector<double>& best_history() const noexcept { return best_history_; }
    [[nodiscard]] std::uint64_t evaluations() const noexcept
    {
        return loss_.evaluations() + (tune_loss_ ? tune_loss_->evaluations() : 0);
    }
    LossFunction& loss_function() noexcept { return loss_; }
    Rng& rng() noexcept { return rng_; }
    [[nodiscard]] double normalizer() const noexcept { return normalizer_; }

private:
    std::size_t select()
    {
        if (config_->adaptive_parsimony <= 0.0) {
            return tournament_select(members_, rng_, config_->tournament_size, config_->tournament_p);
        }
        const auto scores = frequency_scaled_fitness(members_, config_->adaptive_parsimony);
        return tournament_select(std::span<const double>(scores), rng_, config_->tournament_size, config_->tournament_p);
    }

    [[nodiscard]] double penalized(double loss, int complexity) const
    {
        return loss + config_->parsimony * static_cast<double>(complexity);
    }

    [[nodiscard]] double best_penalized() const
    {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& m : hof_.members()) best = std::min(best, penalized(m.loss, m.complexity));
        return best;
    }

    Individual from_loss(Expression e, double loss)
    {
        Individual ind;
        ind.complexity = complexity(e, config_->ops);
        ind.loss = loss;
        const double scaled = loss / normalizer_;
        ind.fitness = config_->penalized_tournament ? scaled + config_->parsimony * static_cast<double>(ind.complexity)
                                                    : scaled;
        ind.expr = std::move(e);
        ind.birth = next_birth_++;
        return ind;
    }

    Individual make(Expression e)
    {
        const double l = loss_(e);
        auto ind = from_loss(std::move(e), l);
        hof_.consider(ind);
        return ind;
    }

    void tune(Individual& m, const ConstantOptimizerOptions& options)
    {
        double new_loss = m.loss;
        auto tuned = optimize_constants(m.expr, tune_loss_ ? *tune_loss_ : loss_, rng_, options, &new_loss);
        if (tuned == m.expr) return;
        if (tune_loss_) {
            new_loss = loss_(tuned);
            if (!(new_loss < m.loss)) return;
        }
        auto birth = m.birth;
        m = from_loss(std::move(tuned), new_loss);
        m.birth = birth;
        hof_.consider(m);
    }

    void replace_oldest(Individual ind)
    {
        std::size_t oldest = 0;
        for (std::size_t i = 1; i < members_.size(); ++i) {
            if (members_[i].birth < members_[oldest].birth) oldest = i;
        }
        ind.birth = next_birth_++;
        members_[oldest] = std::move(ind);
    }

    const SRConfig* config_;
    double temperature_;
    bool tune_children_;
    Rng rng_;
    LossFunction loss_;
    std::optional<LossFunction> tune_loss_; // row subset for constant tuning
    SearchSpace space_;
    HallOfFame hof_;
    std::vector<Individual> members_;
    std::vector<double> best_history_;
    std::uint64_t next_birth_ = 0;
    double normalizer_ = 1.0;
};

// Child-tuning populations are spread evenly around the migration ring.
inline bool island_tunes_children(const SRConfig& config, std::size_t p)
{
    const double f = config.child_opt_fraction;
    return std::floor(static_cast<double>(p + 1) * f) > std::floor(static_cast<double>(p) * f);
}

// Child-tuning populations run hot; the others keep acceptance_temperature.
inline double island_temperature(const SRConfig& config, std::size_t p)
{
    return island_tunes_children(config, p) ? config.acceptance_temperature * config.temperature_spread
                                            : config.acceptance_temperature;
}

template <typename F>
void parallel_for(std::size_t count, int threads, F&& body)
{
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace detail

// Multi-population evolutionary search on one target column. Populations
// evolve independently between migration barriers, so the result depends on
// the seed only, never on `threads`.
inline EvolveResult evolve(std::shared_ptr<const Problem> problem, const SRConfig& config)
{
    config.validate();
    if (problem->x().cols() == 0) {
        throw StructuralError("dataset has no input columns");
    }
    const auto started = std::chrono::steady_clock::now();
    const auto npop = static_cast<std::size_t>(config.n_populations);

    std::vector<std::unique_ptr<detail::Population>> pops;
    pops.reserve(npop);
    for (std::size_t p = 0; p < npop; ++p) {
        pops.push_back(std::make_unique<detail::Population>(derive_seed(config.seed, p), config, problem,
            detail::island_temperature(config, p), detail::island_tunes_children(config, p)));
    }
    detail::parallel_for(npop, config.threads, [&](std::size_t p) { pops[p]->initialize(); });

    int done = 0;
    while (done < config.n_iterations) {
        const int segment = std::min(config.migration_interval, config.n_iterations - done);
        detail::parallel_for(npop, config.threads, [&](std::size_t p) {
            for (int r = 0; r < segment; ++r) pops[p]->run_round(done + r);
        });
        done += segment;
        if (done >= config.n_iterations || config.migration_fraction <= 0.0) continue;

        // Ring migration from a snapshot of every hall of fame, applied in population order.
        std::vector<std::vector<Individual>> fronts;
        fronts.reserve(npop);
        for (const auto& p : pops) fronts.push_back(p->hall_of_fame().front());
        const auto count = static_cast<std::size_t>(
            std::ceil(config.migration_fraction * static_cast<double>(config.population_size)));
        for (std::size_t p = 0; p < npop; ++p) {
            const auto& source = fronts[(p + npop - 1) % npop];
            auto migrants = pops[p]->pick_emigrants(source, count);
            pops[p]->receive(migrants);
        }
    }

    std::vector<FrontEntry> candidates;
    for (const auto& p : pops) {
        for (const auto& m : p->hall_of_fame().members()) {
            candidates.push_back(FrontEntry{m.complexity, m.loss, m.expr});
        }
    }
    auto front = ParetoFront::from_candidates(std::move(candidates));

    EvolveStats stats;
    if (config.polish_front && !front.empty()) {
        Rng polish_rng(derive_seed(config.seed, npop));
        auto& loss = pops.front()->loss_function();
        std::vector<FrontEntry> polished;
        for (const auto& e : front.entries()) {
            double l = e.loss;
            auto tuned = optimize_constants(e.expr, loss, polish_rng, config.optimizer, &l);
            polished.push_back(FrontEntry{e.complexity, std::min(l, e.loss), l < e.loss ? tuned : e.expr});
        }
        front = ParetoFront::from_candidates(std::move(polished));
    }

    for (const auto& p : pops) stats.evaluations += p->evaluations();
    const auto iters = static_cast<std::size_t>(config.n_iterations);
    stats.best_penalized.assign(iters, std::numeric_limits<double>::infinity());
    for (const auto& p : pops) {
        const auto& h = p->best_history();
        for (std::size_t i = 0; i < iters && i < h.size(); ++i) {
            stats.best_penalized[i] = std::min(stats.best_penalized[i], h[i]);
        }
    }
    stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return EvolveResult{std::move(front), std::move(stats)};
}

inline EvolveResult evolve(const Matrix& x, std::span<const double> y, const SRConfig& config)
{
    auto problem = std::make_shared<const Problem>(x, std::vector<double>(y.begin(), y.end()),
        std::vector<double>{}, config.loss);
    return evolve(std::move(problem), config);
}

} // namespace symdistill
