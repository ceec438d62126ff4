#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "config.hpp"
#include "expr.hpp"
#include "rng.hpp"

namespace symdistill {

struct Individual {
    Expression expr;
    int complexity = 1;
    double loss = std::numeric_limits<double>::infinity();    // data loss
    double fitness = std::numeric_limits<double>::infinity(); // what tournaments rank by
    std::uint64_t birth = 0;
};

// Samples `size` entries of `scores` without replacement, ranks them (lower
// is better) and returns the k-th best with probability p(1-p)^k; the last one
// takes the remaining mass.
inline std::size_t tournament_select(std::span<const double> scores, Rng& rng, int size, double p)
{
    const std::size_t n = scores.size();
    if (n == 1) return 0;
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(size, 1)), n);
    std::vector<std::size_t> picked;
    picked.reserve(k);
    while (picked.size() < k) {
        const std::size_t i = rng.index(n);
        if (std::find(picked.begin(), picked.end(), i) == picked.end()) picked.push_back(i);
    }
    std::sort(picked.begin(), picked.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] < scores[b];
        return a < b;
    });
    for (std::size_t r = 0; r + 1 < k; ++r) {
        if (rng.bernoulli(p)) return picked[r];
    }
    return picked.back();
}

// Tournament over member fitness. Returns an index into `population`.
inline std::size_t tournament_select(std::span<const Individual> population, Rng& rng, int size, double p)
{
    std::vector<double> scores(population.size());
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = population[i].fitness;
    return tournament_select(std::span<const double>(scores), rng, size, p);
}

// Fitness scaled by exp(scale * share of the population at the same
// complexity), so that over-represented sizes lose tournaments.
inline std::vector<double> frequency_scaled_fitness(std::span<const Individual> population, double scale)
{
    std::vector<double> scores(population.size());
    std::vector<std::size_t> count;
    for (const auto& m : population) {
        const auto c = static_cast<std::size_t>(std::max(m.complexity, 0));
        if (c >= count.size()) count.resize(c + 1, 0);
        ++count[c];
    }
    const double n = static_cast<double>(population.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto c = static_cast<std::size_t>(std::max(population[i].complexity, 0));
        scores[i] = population[i].fitness * std::exp(scale * static_cast<double>(count[c]) / n);
    }
    return scores;
}

// Always accepts an improvement; otherwise accepts with probability
// exp(-(new - old) / (temperature * max(old, 1e-12))).
inline bool accept(double old_loss, double new_loss, double temperature, Rng& rng)
{
    if (new_loss <= old_loss) return true;
    if (std::isinf(new_loss)) return false;
    const double scale = temperature * std::max(old_loss, 1e-12);
    const double prob = std::exp(-(new_loss - old_loss) / scale);
    return rng.uniform() < prob;
}

enum class MutationKind { PerturbConstant, ReplaceNode, InsertNode, DeleteSubtree };

// What the variation operators need to know about the search space.
struct SearchSpace {
    const OperatorSet* ops = nullptr;
    std::size_t n_variables = 1;
    int max_complexity = 25;
    int retries = 10;

    SearchSpace(const SRConfig& config, std::size_t nvars)
        : ops(&config.ops)
        , n_variables(nvars)
        , max_complexity(config.max_complexity)
        , retries(config.mutation_retries)
    {
    }

    [[nodiscard]] bool admits(const Expression& e) const { return satisfies_constraints(e, *ops, max_complexity); }
};

inline double random_constant(Rng& rng) { return rng.normal(); }

inline Expression random_leaf(Rng& rng, std::size_t n_variables)
{
    if (n_variables > 0 && rng.bernoulli(0.5)) {
        return Expression::variable(static_cast<std::uint32_t>(rng.index(n_variables)));
    }
    return Expression::constant(random_constant(rng));
}

namespace detail {

inline Expression grow(Rng& rng, const SearchSpace& space, int depth)
{
    if (depth <= 1 || rng.bernoulli(0.3)) return random_leaf(rng, space.n_variables);
    const auto& ops = space.ops->operators();
    const auto& op = ops[rng.index(ops.size())];
    if (op.arity() == 1) return Expression::unary(op.code, grow(rng, space, depth - 1));
    auto lhs = grow(rng, space, depth - 1);
    auto rhs = grow(rng, space, depth - 1);
    return Expression::binary(op.code, lhs, rhs);
}

} // namespace detail

// Random tree of depth at most `max_depth` that satisfies the constraints.
inline Expression random_tree(Rng& rng, const SearchSpace& space, int max_depth)
{
    for (int attempt = 0; attempt < 4 * space.retries; ++attempt) {
        auto e = detail::grow(rng, space, max_depth);
        if (space.admits(e)) return e;
    }
    return random_leaf(rng, space.n_variables);
}

// One attempt at a specific mutation; nullopt when it does not apply to `expr`.
// The result is not checked against the constraints.
inline std::optional<Expression> mutate_with(MutationKind kind, const Expression& expr, Rng& rng,
    const SearchSpace& space)
{
    const auto& nodes = expr.nodes();
    switch (kind) {
    case MutationKind::PerturbConstant: {
        std::vector<std::size_t> consts;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].kind == NodeKind::Constant) consts.push_back(i);
        }
        if (consts.empty()) return std::nullopt;
        const std::size_t i = consts[rng.index(consts.size())];
        const double c = nodes[i].value;
        for (int attempt = 0; attempt < 16; ++attempt) {
            double next = c == 0.0 ? random_constant(rng) : c * std::exp(0.5 * rng.normal());
            if (rng.bernoulli(0.1)) next = -next;
            if (std::isfinite(next) && next != c) return expr.replace(i, Expression::constant(next));
        }
        return std::nullopt;
    }
    case MutationKind::ReplaceNode: {
        const std::size_t i = rng.index(nodes.size());
        const auto& n = nodes[i];
        if (n.kind == NodeKind::Apply) {
            std::vector<OpCode> same;
            for (const auto& op : space.ops->operators()) {
                if (op.arity() == n.arity() && op.code != n.op) same.push_back(op.code);
            }
            if (same.empty()) return std::nullopt;
            std::vector<Node> copy = nodes;
            copy[i].op = same[rng.index(same.size())];
            return Expression(std::move(copy));
        }
        for (int attempt = 0; attempt < 16; ++attempt) {
            auto leaf = random_leaf(rng, space.n_variables);
            if (!leaf.root().same_as(n)) return expr.replace(i, leaf);
        }
        return std::nullopt;
    }
    case MutationKind::InsertNode: {
        const std::size_t i = rng.index(nodes.size());
        const auto& ops = space.ops->operators();
        const auto& op = ops[rng.index(ops.size())];
        const auto sub = expr.subtree(i);
        Expression wrapped;
        if (op.arity() == 1) {
            wrapped = Expression::unary(op.code, sub);
        } else if (rng.bernoulli(0.5)) {
            wrapped = Expression::binary(op.code, sub, random_leaf(rng, space.n_variables));
        } else {
            wrapped = Expression::binary(op.code, random_leaf(rng, space.n_variables), sub);
        }
        return expr.replace(i, wrapped);
    }
    case MutationKind::DeleteSubtree: {
        std::vector<std::size_t> inner;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].kind == NodeKind::Apply) inner.push_back(i);
        }
        if (inner.empty()) return std::nullopt;
        const std::size_t i = inner[rng.index(inner.size())];
        return expr.replace(i, random_leaf(rng, space.n_variables));
    }
    }
    return std::nullopt;
}

inline MutationKind draw_mutation(Rng& rng, const MutationWeights& w, bool has_constants)
{
    const double pc = has_constants ? w.perturb_constant : 0.0;
    const double total = pc + w.replace_node + w.insert_node + w.delete_subtree;
    double u = rng.uniform() * total;
    if ((u -= pc) < 0.0) return MutationKind::PerturbConstant;
    if ((u -= w.replace_node) < 0.0) return MutationKind::ReplaceNode;
    if ((u -= w.insert_node) < 0.0) return MutationKind::InsertNode;
    return MutationKind::DeleteSubtree;
}

// Applies one randomly drawn mutation. Results that break the complexity or
// argument limits are retried up to `space.retries` times; after that the
// input comes back unchanged.
inline Expression mutate(const Expression& expr, Rng& rng, const SearchSpace& space,
    const MutationWeights& weights = {})
{
    const bool has_constants = expr.constant_count() > 0;
    for (int attempt = 0; attempt < space.retries; ++attempt) {
        const auto kind = draw_mutation(rng, weights, has_constants);
        auto out = mutate_with(kind, expr, rng, space);
        if (out && space.admits(*out)) return std::move(*out);
    }
    return expr;
}

// Swaps uniformly chosen subtrees between a and b. Falls back to the
// unchanged pair when no admissible swap is found within the retry budget.
inline std::pair<Expression, Expression> crossover(const Expression& a, const Expression& b, Rng& rng,
    const SearchSpace& space)
{
    for (int attempt = 0; attempt < space.retries; ++attempt) {
        const std::size_t i = rng.index(a.size());
        const std::size_t j = rng.index(b.size());
        auto first = a.replace(i, b.subtree(j));
        auto second = b.replace(j, a.subtree(i));
        if (space.admits(first) && space.admits(second)) return {std::move(first), std::move(second)};
    }
    return {a, b};
}

} // namespace symdistill
