#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"

namespace symdistill {

enum class OpCode : std::uint8_t { Add, Sub, Mul, Inv, Sin, Cos, Exp, Log, Sqrt, Square };

inline constexpr std::size_t kOpCount = 10;

inline constexpr std::array<std::string_view, kOpCount> kOpNames = {
    "+", "-", "*", "inv", "sin", "cos", "exp", "log", "sqrt", "square"};

constexpr int arity(OpCode op) noexcept
{
    switch (op) {
    case OpCode::Add:
    case OpCode::Sub:
    case OpCode::Mul:
        return 2;
    default:
        return 1;
    }
}

constexpr std::string_view op_name(OpCode op) noexcept { return kOpNames[static_cast<std::size_t>(op)]; }

inline std::optional<OpCode> op_from_name(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < kOpCount; ++i) {
        if (kOpNames[i] == name) {
            return static_cast<OpCode>(i);
        }
    }
    if (name == "add") return OpCode::Add;
    if (name == "sub") return OpCode::Sub;
    if (name == "mul" || name == "mult") return OpCode::Mul;
    return std::nullopt;
}

struct Operator {
    OpCode code = OpCode::Add;
    int complexity = 1;
    // Largest complexity any argument subtree may have.
    std::optional<int> arg_complexity_limit;

    [[nodiscard]] std::string_view name() const noexcept { return op_name(code); }
    [[nodiscard]] int arity() const noexcept { return symdistill::arity(code); }
};

// sin and exp cost 3 by default, everything else 1.
inline Operator make_operator(OpCode code)
{
    Operator op;
    op.code = code;
    op.complexity = (code == OpCode::Sin || code == OpCode::Exp) ? 3 : 1;
    return op;
}

class OperatorSet {
public:
    OperatorSet() { slots_.fill(-1); }

    explicit OperatorSet(std::vector<Operator> ops)
        : OperatorSet()
    {
        for (const auto& op : ops) {
            add(op);
        }
        validate();
    }

    // The configuration default: {+, *, inv, sin, exp}.
    static OperatorSet defaults()
    {
        return OperatorSet({make_operator(OpCode::Add), make_operator(OpCode::Mul), make_operator(OpCode::Inv),
            make_operator(OpCode::Sin), make_operator(OpCode::Exp)});
    }

    // Every operator the grammar knows, at default complexities.
    static OperatorSet all()
    {
        std::vector<Operator> ops;
        for (std::size_t i = 0; i < kOpCount; ++i) {
            ops.push_back(make_operator(static_cast<OpCode>(i)));
        }
        return OperatorSet(std::move(ops));
    }

    // Every operator the grammar knows, with unit complexity.
    static OperatorSet unit_all()
    {
        std::vector<Operator> ops;
        for (std::size_t i = 0; i < kOpCount; ++i) {
            ops.push_back(Operator{static_cast<OpCode>(i), 1, std::nullopt});
        }
        return OperatorSet(std::move(ops));
    }

    static OperatorSet from_names(const std::vector<std::string>& names)
    {
        std::vector<Operator> ops;
        for (const auto& n : names) {
            auto code = op_from_name(n);
            if (!code) {
                throw ConfigError("unknown operator '" + n + "'");
            }
            ops.push_back(make_operator(*code));
        }
        return OperatorSet(std::move(ops));
    }

    void add(const Operator& op)
    {
        if (op.complexity < 1) {
            throw ConfigError("operator '" + std::string(op.name()) + "' needs complexity >= 1");
        }
        if (op.arg_complexity_limit && *op.arg_complexity_limit < 1) {
            throw ConfigError("operator '" + std::string(op.name()) + "' has a non-positive argument limit");
        }
        auto slot = static_cast<std::size_t>(op.code);
        if (slots_[slot] >= 0) {
            throw ConfigError("duplicate operator '" + std::string(op.name()) + "'");
        }
        slots_[slot] = static_cast<int>(ops_.size());
        ops_.push_back(op);
    }

    void validate() const
    {
        if (binary().empty()) {
            throw ConfigError("operator set needs at least one binary operator");
        }
    }

    [[nodiscard]] bool contains(OpCode code) const noexcept { return slots_[static_cast<std::size_t>(code)] >= 0; }

    [[nodiscard]] const Operator* find(OpCode code) const noexcept
    {
        auto s = slots_[static_cast<std::size_t>(code)];
        return s < 0 ? nullptr : &ops_[static_cast<std::size_t>(s)];
    }

    [[nodiscard]] const Operator& at(OpCode code) const
    {
        const auto* op = find(code);
        if (op == nullptr) {
            throw StructuralError("operator '" + std::string(op_name(code)) + "' is not in the operator set");
        }
        return *op;
    }

    Operator& at(OpCode code)
    {
        return const_cast<Operator&>(std::as_const(*this).at(code));
    }

    [[nodiscard]] const std::vector<Operator>& operators() const noexcept { return ops_; }

    [[nodiscard]] std::vector<OpCode> unary() const { return with_arity(1); }
    [[nodiscard]] std::vector<OpCode> binary() const { return with_arity(2); }

private:
    [[nodiscard]] std::vector<OpCode> with_arity(int a) const
    {
        std::vector<OpCode> out;
        for (const auto& op : ops_) {
            if (op.arity() == a) {
                out.push_back(op.code);
            }
        }
        return out;
    }

    std::vector<Operator> ops_;
    std::array<int, kOpCount> slots_{};
};

enum class NodeKind : std::uint8_t { Constant, Variable, Apply };

struct Node {
    NodeKind kind = NodeKind::Constant;
    OpCode op = OpCode::Add;
    std::uint32_t index = 0; // variable column
    double value = 0.0;      // constant value
    std::uint32_t length = 1; // size of the subtree rooted here, including this node

    static Node constant(double v) { return Node{NodeKind::Constant, OpCode::Add, 0, v, 1}; }
    static Node variable(std::uint32_t i) { return Node{NodeKind::Variable, OpCode::Add, i, 0.0, 1}; }
    static Node apply(OpCode op) { return Node{NodeKind::Apply, op, 0, 0.0, 1}; }

    [[nodiscard]] bool is_leaf() const noexcept { return kind != NodeKind::Apply; }
    [[nodiscard]] int arity() const noexcept { return kind == NodeKind::Apply ? symdistill::arity(op) : 0; }

    // Structural identity; constants compare bitwise.
    [[nodiscard]] bool same_as(const Node& other) const noexcept
    {
        if (kind != other.kind) return false;
        switch (kind) {
        case NodeKind::Constant:
            return std::bit_cast<std::uint64_t>(value) == std::bit_cast<std::uint64_t>(other.value);
        case NodeKind::Variable:
            return index == other.index;
        case NodeKind::Apply:
            return op == other.op;
        }
        return false;
    }
};

// An immutable expression tree stored in postfix order. The subtree rooted at
// node i occupies [i + 1 - length, i]; the root is the last node.
class Expression {
public:
    Expression() : nodes_{Node::constant(0.0)} {}

    explicit Expression(std::vector<Node> postfix)
        : nodes_(std::move(postfix))
    {
        if (nodes_.empty()) {
            throw StructuralError("empty expression");
        }
        relink();
    }

    static Expression constant(double v) { return Expression(std::vector<Node>{Node::constant(v)}); }
    static Expression variable(std::uint32_t i) { return Expression(std::vector<Node>{Node::variable(i)}); }

    static Expression unary(OpCode op, const Expression& arg)
    {
        if (arity(op) != 1) {
            throw StructuralError("operator '" + std::string(op_name(op)) + "' is not unary");
        }
        std::vector<Node> n = arg.nodes_;
        n.push_back(Node::apply(op));
        return Expression(std::move(n));
    }

    static Expression binary(OpCode op, const Expression& lhs, const Expression& rhs)
    {
        if (arity(op) != 2) {
            throw StructuralError("operator '" + std::string(op_name(op)) + "' is not binary");
        }
        std::vector<Node> n;
        n.reserve(lhs.size() + rhs.size() + 1);
        n.insert(n.end(), lhs.nodes_.begin(), lhs.nodes_.end());
        n.insert(n.end(), rhs.nodes_.begin(), rhs.nodes_.end());
        n.push_back(Node::apply(op));
        return Expression(std::move(n));
    }

    [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] std::size_t root_index() const noexcept { return nodes_.size() - 1; }
    [[nodiscard]] const Node& root() const noexcept { return nodes_.back(); }
    [[nodiscard]] const Node& operator[](std::size_t i) const noexcept { return nodes_[i]; }

    [[nodiscard]] std::size_t subtree_begin(std::size_t i) const noexcept { return i + 1 - nodes_[i].length; }

    // Child indices of node i, left to right.
    [[nodiscard]] std::vector<std::size_t> children(std::size_t i) const
    {
        std::vector<std::size_t> out;
        const int a = nodes_[i].arity();
        if (a == 0) return out;
        std::size_t c = i - 1;
        out.push_back(c);
        for (int k = 1; k < a; ++k) {
            c -= nodes_[c].length;
            out.push_back(c);
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

    [[nodiscard]] Expression subtree(std::size_t i) const
    {
        return Expression(std::vector<Node>(nodes_.begin() + static_cast<std::ptrdiff_t>(subtree_begin(i)),
            nodes_.begin() + static_cast<std::ptrdiff_t>(i) + 1));
    }

    // Copy with the subtree rooted at i swapped for `replacement`.
    [[nodiscard]] Expression replace(std::size_t i, const Expression& replacement) const
    {
        const auto begin = static_cast<std::ptrdiff_t>(subtree_begin(i));
        std::vector<Node> n;
        n.reserve(nodes_.size() - nodes_[i].length + replacement.size());
        n.insert(n.end(), nodes_.begin(), nodes_.begin() + begin);
        n.insert(n.end(), replacement.nodes_.begin(), replacement.nodes_.end());
        n.insert(n.end(), nodes_.begin() + static_cast<std::ptrdiff_t>(i) + 1, nodes_.end());
        return Expression(std::move(n));
    }

    [[nodiscard]] std::vector<double> constants() const
    {
        std::vector<double> out;
        for (const auto& n : nodes_) {
            if (n.kind == NodeKind::Constant) out.push_back(n.value);
        }
        return out;
    }

    [[nodiscard]] std::size_t constant_count() const noexcept
    {
        return static_cast<std::size_t>(std::count_if(
            nodes_.begin(), nodes_.end(), [](const Node& n) { return n.kind == NodeKind::Constant; }));
    }

    // Constants are replaced in postfix order.
    [[nodiscard]] Expression with_constants(std::span<const double> values) const
    {
        Expression out = *this;
        std::size_t k = 0;
        for (auto& n : out.nodes_) {
            if (n.kind == NodeKind::Constant) {
                if (k >= values.size()) {
                    throw StructuralError("too few constants supplied");
                }
                n.value = values[k++];
            }
        }
        return out;
    }

    [[nodiscard]] std::uint32_t max_variable() const noexcept
    {
        std::uint32_t m = 0;
        for (const auto& n : nodes_) {
            if (n.kind == NodeKind::Variable) m = std::max(m, n.index + 1);
        }
        return m; // one past the largest referenced index; 0 when there are none
    }

    [[nodiscard]] bool uses_variable(std::uint32_t v) const noexcept
    {
        return std::any_of(nodes_.begin(), nodes_.end(),
            [v](const Node& n) { return n.kind == NodeKind::Variable && n.index == v; });
    }

    [[nodiscard]] std::size_t depth() const
    {
        std::vector<std::size_t> d(nodes_.size(), 1);
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            for (auto c : children(i)) d[i] = std::max(d[i], d[c] + 1);
        }
        return d.back();
    }

    [[nodiscard]] std::uint64_t hash() const noexcept
    {
        std::uint64_t h = 1469598103934665603ULL;
        auto mix = [&h](std::uint64_t v) {
            h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        };
        for (const auto& n : nodes_) {
            mix(static_cast<std::uint64_t>(n.kind));
            switch (n.kind) {
            case NodeKind::Constant: mix(std::bit_cast<std::uint64_t>(n.value)); break;
            case NodeKind::Variable: mix(n.index); break;
            case NodeKind::Apply: mix(static_cast<std::uint64_t>(n.op) + 64); break;
            }
        }
        return h;
    }

    friend bool operator==(const Expression& a, const Expression& b) noexcept
    {
        return a.nodes_.size() == b.nodes_.size()
            && std::equal(a.nodes_.begin(), a.nodes_.end(), b.nodes_.begin(),
                [](const Node& x, const Node& y) { return x.same_as(y); });
    }

private:
    // Recomputes subtree lengths and checks that the postfix sequence forms one tree.
    void relink()
    {
        std::vector<std::uint32_t> stack;
        stack.reserve(nodes_.size());
        for (auto& n : nodes_) {
            const int a = n.arity();
            if (static_cast<int>(stack.size()) < a) {
                throw StructuralError("malformed postfix sequence: operator '" + std::string(op_name(n.op))
                    + "' is missing arguments");
            }
            std::uint32_t len = 1;
            for (int k = 0; k < a; ++k) {
                len += stack.back();
                stack.pop_back();
            }
            n.length = len;
            stack.push_back(len);
        }
        if (stack.size() != 1) {
            throw StructuralError("malformed postfix sequence: " + std::to_string(stack.size()) + " roots");
        }
    }

    std::vector<Node> nodes_;
};

// Weighted node count: each Apply contributes its operator's complexity,
// constants and variables contribute 1.
inline int complexity(const Expression& expr, const OperatorSet& ops)
{
    int total = 0;
    for (const auto& n : expr.nodes()) {
        total += n.kind == NodeKind::Apply ? ops.at(n.op).complexity : 1;
    }
    return total;
}

// Complexity of every subtree, indexed like expr.nodes().
inline std::vector<int> subtree_complexities(const Expression& expr, const OperatorSet& ops)
{
    const auto& nodes = expr.nodes();
    std::vector<int> c(nodes.size(), 0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].is_leaf()) {
            c[i] = 1;
            continue;
        }
        int sum = ops.at(nodes[i].op).complexity;
        for (auto ch : expr.children(i)) sum += c[ch];
        c[i] = sum;
    }
    return c;
}

// Every operator known to `ops`, total complexity within `max_complexity`,
// and every argument within its operator's limit.
inline bool satisfies_constraints(const Expression& expr, const OperatorSet& ops, int max_complexity)
{
    for (const auto& n : expr.nodes()) {
        if (n.kind == NodeKind::Apply && !ops.contains(n.op)) return false;
    }
    const auto c = subtree_complexities(expr, ops);
    if (c.back() > max_complexity) return false;
    for (std::size_t i = 0; i < expr.size(); ++i) {
        const auto& n = expr[i];
        if (n.kind != NodeKind::Apply) continue;
        const auto& op = ops.at(n.op);
        if (!op.arg_complexity_limit) continue;
        for (auto ch : expr.children(i)) {
            if (c[ch] > *op.arg_complexity_limit) return false;
        }
    }
    return true;
}

namespace detail {

inline double apply_unary(OpCode op, double a) noexcept
{
    switch (op) {
    case OpCode::Inv: return a == 0.0 ? std::numeric_limits<double>::quiet_NaN() : 1.0 / a;
    case OpCode::Sin: return std::sin(a);
    case OpCode::Cos: return std::cos(a);
    case OpCode::Exp: return std::exp(a);
    case OpCode::Log: return a > 0.0 ? std::log(a) : std::numeric_limits<double>::quiet_NaN();
    case OpCode::Sqrt: return a >= 0.0 ? std::sqrt(a) : std::numeric_limits<double>::quiet_NaN();
    case OpCode::Square: return a * a;
    default: return std::numeric_limits<double>::quiet_NaN();
    }
}

inline double apply_binary(OpCode op, double a, double b) noexcept
{
    switch (op) {
    case OpCode::Add: return a + b;
    case OpCode::Sub: return a - b;
    case OpCode::Mul: return a * b;
    default: return std::numeric_limits<double>::quiet_NaN();
    }
}

inline double sanitize(double v) noexcept
{
    return std::isfinite(v) ? v : std::numeric_limits<double>::quiet_NaN();
}

} // namespace detail

// Scalar application of an operator with protected semantics: domain errors
// and overflow give NaN.
inline double apply_operator(OpCode op, double a, double b = 0.0) noexcept
{
    return detail::sanitize(arity(op) == 1 ? detail::apply_unary(op, a) : detail::apply_binary(op, a, b));
}

// Column-major view of a dataset, the layout the evaluator works on.
class ColumnData {
public:
    ColumnData() = default;

    explicit ColumnData(const Matrix& x)
        : rows_(x.rows())
        , columns_(x.cols(), std::vector<double>(x.rows()))
    {
        for (std::size_t r = 0; r < x.rows(); ++r) {
            for (std::size_t c = 0; c < x.cols(); ++c) {
                columns_[c][r] = x(r, c);
            }
        }
    }

    ColumnData(std::vector<std::vector<double>> columns, std::size_t rows)
        : rows_(rows)
        , columns_(std::move(columns))
    {
        for (const auto& c : columns_) {
            if (c.size() != rows_) throw StructuralError("column length mismatch");
        }
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return columns_.size(); }
    [[nodiscard]] const std::vector<double>& column(std::size_t c) const noexcept { return columns_[c]; }

private:
    std::size_t rows_ = 0;
    std::vector<std::vector<double>> columns_;
};

inline void check_variables(const Expression& expr, std::size_t d)
{
    for (const auto& n : expr.nodes()) {
        if (n.kind == NodeKind::Variable && n.index >= d) {
            throw StructuralError("variable index " + std::to_string(n.index) + " out of range for "
                + std::to_string(d) + " input columns");
        }
    }
}

// Row-chunked evaluator. Holds scratch buffers so repeated evaluation does not allocate.
class Evaluator {
public:
    static constexpr std::size_t kChunk = 256;

    // Writes expr(row) into out[row] for every row of `data`.
    void evaluate(const Expression& expr, const ColumnData& data, std::span<double> out)
    {
        check_variables(expr, data.cols());
        if (out.size() != data.rows()) {
            throw StructuralError("output buffer has " + std::to_string(out.size()) + " slots for "
                + std::to_string(data.rows()) + " rows");
        }
        const auto& nodes = expr.nodes();
        scratch_.resize(nodes.size() * kChunk);
        for (std::size_t start = 0; start < data.rows(); start += kChunk) {
            const std::size_t len = std::min(kChunk, data.rows() - start);
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                double* dst = scratch_.data() + i * kChunk;
                const auto& n = nodes[i];
                switch (n.kind) {
                case NodeKind::Constant:
                    std::fill_n(dst, len, n.value);
                    break;
                case NodeKind::Variable: {
                    const double* src = data.column(n.index).data() + start;
                    std::copy_n(src, len, dst);
                    break;
                }
                case NodeKind::Apply: {
                    const double* rhs = scratch_.data() + (i - 1) * kChunk;
                    if (arity(n.op) == 1) {
                        run_unary(n.op, rhs, dst, len);
                    } else {
                        const double* lhs = scratch_.data() + (i - 1 - nodes[i - 1].length) * kChunk;
                        run_binary(n.op, lhs, rhs, dst, len);
                    }
                    break;
                }
                }
            }
            std::copy_n(scratch_.data() + (nodes.size() - 1) * kChunk, len, out.data() + start);
        }
    }

    std::vector<double> evaluate(const Expression& expr, const ColumnData& data)
    {
        std::vector<double> out(data.rows());
        evaluate(expr, data, out);
        return out;
    }

private:
    static void run_unary(OpCode op, const double* a, double* dst, std::size_t len) noexcept
    {
        constexpr double nan = std::numeric_limits<double>::quiet_NaN();
        switch (op) {
        case OpCode::Inv:
            for (std::size_t r = 0; r < len; ++r) dst[r] = a[r] == 0.0 ? nan : 1.0 / a[r];
            break;
        case OpCode::Sin:
            for (std::size_t r = 0; r < len; ++r) dst[r] = std::sin(a[r]);
            break;
        case OpCode::Cos:
            for (std::size_t r = 0; r < len; ++r) dst[r] = std::cos(a[r]);
            break;
        case OpCode::Exp:
            for (std::size_t r = 0; r < len; ++r) dst[r] = std::exp(a[r]);
            break;
        case OpCode::Log:
            for (std::size_t r = 0; r < len; ++r) dst[r] = a[r] > 0.0 ? std::log(a[r]) : nan;
            break;
        case OpCode::Sqrt:
            for (std::size_t r = 0; r < len; ++r) dst[r] = a[r] >= 0.0 ? std::sqrt(a[r]) : nan;
            break;
        case OpCode::Square:
            for (std::size_t r = 0; r < len; ++r) dst[r] = a[r] * a[r];
            break;
        default:
            std::fill_n(dst, len, nan);
        }
        for (std::size_t r = 0; r < len; ++r) dst[r] = detail::sanitize(dst[r]);
    }

    static void run_binary(OpCode op, const double* a, const double* b, double* dst, std::size_t len) noexcept
    {
        switch (op) {
        case OpCode::Add:
            for (std::size_t r = 0; r < len; ++r) dst[r] = a[r] + b[r];
            break;
        case OpCode::Sub:
            for (std::size_t r = 0; r < len; ++r) dst[r] = a[r] - b[r];
            break;
        case OpCode::Mul:
            for (std::size_t r = 0; r < len; ++r) dst[r] = a[r] * b[r];
            break;
        default:
            std::fill_n(dst, len, std::numeric_limits<double>::quiet_NaN());
        }
        for (std::size_t r = 0; r < len; ++r) dst[r] = detail::sanitize(dst[r]);
    }

    std::vector<double> scratch_;
};

// Evaluates expr on every row of X. Domain violations give NaN for that row only.
inline std::vector<double> eval_batch(const Expression& expr, const Matrix& x)
{
    check_variables(expr, x.cols());
    Evaluator ev;
    return ev.evaluate(expr, ColumnData(x));
}

// Single-point evaluation.
inline double eval_point(const Expression& expr, std::span<const double> point)
{
    check_variables(expr, point.size());
    const auto& nodes = expr.nodes();
    std::vector<double> v(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        switch (n.kind) {
        case NodeKind::Constant: v[i] = n.value; break;
        case NodeKind::Variable: v[i] = point[n.index]; break;
        case NodeKind::Apply:
            if (arity(n.op) == 1) {
                v[i] = apply_operator(n.op, v[i - 1]);
            } else {
                v[i] = apply_operator(n.op, v[i - 1 - nodes[i - 1].length], v[i - 1]);
            }
            break;
        }
    }
    return v.back();
}

} // namespace symdistill
