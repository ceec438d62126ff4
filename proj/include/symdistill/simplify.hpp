#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "expr.hpp"

namespace symdistill {

namespace detail {

struct Tree {
    Node node;
    std::vector<Tree> kids;

    [[nodiscard]] bool is_constant() const noexcept { return node.kind == NodeKind::Constant; }
    [[nodiscard]] bool is_op(OpCode op) const noexcept { return node.kind == NodeKind::Apply && node.op == op; }

    friend bool operator==(const Tree& a, const Tree& b)
    {
        return a.node.same_as(b.node) && a.kids == b.kids;
    }
};

inline Tree to_tree(const Expression& expr, std::size_t i)
{
    Tree t{expr[i], {}};
    for (auto c : expr.children(i)) t.kids.push_back(to_tree(expr, c));
    return t;
}

inline void flatten_tree(const Tree& t, std::vector<Node>& out)
{
    for (const auto& k : t.kids) flatten_tree(k, out);
    out.push_back(t.node);
}

inline Tree leaf_constant(double v) { return Tree{Node::constant(v), {}}; }

inline Tree make_apply(OpCode op, std::vector<Tree> kids) { return Tree{Node::apply(op), std::move(kids)}; }

class Simplifier {
public:
    explicit Simplifier(const OperatorSet* ops) : ops_(ops) {}

    Tree run(const Tree& t)
    {
        if (t.node.is_leaf()) return t;
        std::vector<Tree> kids;
        kids.reserve(t.kids.size());
        for (const auto& k : t.kids) kids.push_back(run(k));
        const OpCode op = t.node.op;
        switch (op) {
        case OpCode::Add:
        case OpCode::Mul:
            return chain(op, std::move(kids));
        case OpCode::Sub:
            return subtract(std::move(kids[0]), std::move(kids[1]));
        default:
            return unary(op, std::move(kids[0]));
        }
    }

private:
    [[nodiscard]] int op_cost(OpCode op) const
    {
        if (ops_ == nullptr) return 1;
        const auto* o = ops_->find(op);
        return o == nullptr ? 1 : o->complexity;
    }

    [[nodiscard]] int cost(const Tree& t) const
    {
        int c = t.node.is_leaf() ? 1 : op_cost(t.node.op);
        for (const auto& k : t.kids) c += cost(k);
        return c;
    }

    [[nodiscard]] bool may_use(OpCode op) const { return ops_ == nullptr || ops_->contains(op); }

    static Tree unary(OpCode op, Tree arg)
    {
        if (arg.is_constant()) {
            const double v = apply_operator(op, arg.node.value);
            if (std::isfinite(v)) return leaf_constant(v);
        }
        if (op == OpCode::Inv && arg.is_op(OpCode::Inv)) {
            return std::move(arg.kids[0]);
        }
        return make_apply(op, {std::move(arg)});
    }

    static Tree subtract(Tree lhs, Tree rhs)
    {
        if (lhs.is_constant() && rhs.is_constant()) {
            const double v = lhs.node.value - rhs.node.value;
            if (std::isfinite(v)) return leaf_constant(v);
        }
        if (rhs.is_constant() && rhs.node.value == 0.0) return lhs;
        if (lhs == rhs) return leaf_constant(0.0);
        return make_apply(OpCode::Sub, {std::move(lhs), std::move(rhs)});
    }

    static std::pair<double, Tree> split_coefficient(const Tree& t)
    {
        if (t.is_op(OpCode::Mul)) {
            if (t.kids[0].is_constant()) return {t.kids[0].node.value, t.kids[1]};
            if (t.kids[1].is_constant()) return {t.kids[1].node.value, t.kids[0]};
        }
        return {1.0, t};
    }

    static Tree left_fold(OpCode op, std::vector<Tree> items)
    {
        Tree acc = std::move(items[0]);
        for (std::size_t i = 1; i < items.size(); ++i) {
            acc = make_apply(op, {std::move(acc), std::move(items[i])});
        }
        return acc;
    }

    // Flattens an associative chain, merges its constants, collapses repeated
    // summands into k * term and drops identity elements.
    Tree chain(OpCode op, std::vector<Tree> kids)
    {
        std::vector<Tree> items;
        for (auto& k : kids) {
            if (k.is_op(op)) {
                for (auto& g : k.kids) items.push_back(std::move(g));
            } else {
                items.push_back(std::move(k));
            }
        }

        const bool add = op == OpCode::Add;
        const double identity = add ? 0.0 : 1.0;

        // Summands are grouped by base term, so 2 * x + x and x + x + x both
        // land on x with a summed coefficient.
        struct Group {
            Tree base;
            std::vector<Tree> members;
            double coef = 0.0;
            bool is_constant_slot = false;
        };
        std::vector<Group> groups;
        double folded = identity;
        int constant_count = 0;
        for (const auto& it : items) {
            if (it.is_constant()) {
                folded = add ? folded + it.node.value : folded * it.node.value;
                if (constant_count++ == 0) groups.push_back(Group{Tree{}, {}, 0.0, true});
                continue;
            }
            if (!add) {
                groups.push_back(Group{Tree{}, {it}, 1.0, false});
                continue;
            }
            auto [coef, base] = split_coefficient(it);
            auto found = std::find_if(groups.begin(), groups.end(),
                [&base](const Group& g) { return !g.is_constant_slot && g.base == base; });
            if (found != groups.end()) {
                found->coef += coef;
                found->members.push_back(it);
            } else {
                groups.push_back(Group{std::move(base), {it}, coef, false});
            }
        }

        if (constant_count > 0 && !std::isfinite(folded)) {
            // Folding overflowed; keep the chain as it was.
            return left_fold(op, std::move(items));
        }
        if (!add && constant_count > 0 && folded == 0.0) {
            return leaf_constant(0.0);
        }

        std::vector<Tree> out;
        for (auto& g : groups) {
            if (g.is_constant_slot) {
                if (folded != identity) out.push_back(leaf_constant(folded));
                continue;
            }
            if (g.members.size() == 1) {
                out.push_back(std::move(g.members[0]));
                continue;
            }
            // The members as they stand, joined by members - 1 additions.
            int before = static_cast<int>(g.members.size() - 1) * op_cost(OpCode::Add);
            for (const auto& m : g.members) before += cost(m);

            const bool drop = g.coef == 0.0;
            Tree merged;
            if (drop) {
                merged = leaf_constant(0.0);
            } else if (g.coef == 1.0) {
                merged = g.base;
            } else {
                merged = make_apply(OpCode::Mul, {leaf_constant(g.coef), g.base});
            }
            const bool allowed = std::isfinite(g.coef) && (drop || g.coef == 1.0 || may_use(OpCode::Mul));
            if (allowed && cost(merged) <= before) {
                if (!drop) out.push_back(std::move(merged));
            } else {
                for (auto& m : g.members) out.push_back(std::move(m));
            }
        }

        if (out.empty()) return leaf_constant(constant_count > 0 ? folded : identity);
        return left_fold(op, std::move(out));
    }

    const OperatorSet* ops_;
};

} // namespace detail

// Rewrites expr into an equivalent form that is never more complex: constant
// folding, repeated summands to k * x, identity elements, inv(inv(e)) -> e and
// merged constants in + and * chains. With `ops`, rewrites that would raise the
// weighted complexity or need an operator outside the set are skipped.
inline Expression simplify(const Expression& expr, const OperatorSet* ops = nullptr)
{
    detail::Simplifier s(ops);
    auto tree = s.run(detail::to_tree(expr, expr.root_index()));
    std::vector<Node> nodes;
    nodes.reserve(expr.size());
    detail::flatten_tree(tree, nodes);
    return Expression(std::move(nodes));
}

inline Expression simplify(const Expression& expr, const OperatorSet& ops) { return simplify(expr, &ops); }

} // namespace symdistill
