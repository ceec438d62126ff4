#pragma once

#include <cctype>
#include <charconv>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"

namespace symdistill {

// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Full-precision text (17 significant digits) for reports.
inline std::string format_double_17(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::string variable_name(std::uint32_t index, std::span<const std::string> names)
{
    if (index < names.size() && !names[index].empty()) {
        return names[index];
    }
    return "x" + std::to_string(index);
}

// Binary operators print infix inside parentheses, unary ones as calls.
inline std::string render(const Expression& expr, std::span<const std::string> names = {})
{
    const auto& nodes = expr.nodes();
    std::vector<std::string> text(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        switch (n.kind) {
        case NodeKind::Constant:
            text[i] = format_double(n.value);
            break;
        case NodeKind::Variable:
            text[i] = variable_name(n.index, names);
            break;
        case NodeKind::Apply: {
            auto ch = expr.children(i);
            if (ch.size() == 1) {
                text[i] = std::string(op_name(n.op)) + "(" + text[ch[0]] + ")";
            } else {
                text[i] = "(" + text[ch[0]] + " " + std::string(op_name(n.op)) + " " + text[ch[1]] + ")";
            }
            // children are no longer needed
            for (auto c : ch) std::string().swap(text[c]);
            break;
        }
        }
    }
    return text.back();
}

namespace detail {

class Parser {
public:
    Parser(std::string_view text, std::span<const std::string> names)
        : text_(text)
        , names_(names)
    {
    }

    Expression run()
    {
        auto e = parse_sum();
        skip_space();
        if (pos_ < text_.size()) {
            fail("unexpected trailing input '" + std::string(1, text_[pos_]) + "'");
        }
        return Expression(std::move(e));
    }

private:
    using Nodes = std::vector<Node>;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(pos_, msg); }

    void skip_space()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    [[nodiscard]] char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    static void join(Nodes& lhs, Nodes&& rhs, OpCode op)
    {
        lhs.insert(lhs.end(), rhs.begin(), rhs.end());
        lhs.push_back(Node::apply(op));
    }

    Nodes parse_sum()
    {
        Nodes lhs = parse_product();
        for (;;) {
            skip_space();
            const char c = peek();
            if (c != '+' && c != '-') return lhs;
            ++pos_;
            join(lhs, parse_product(), c == '+' ? OpCode::Add : OpCode::Sub);
        }
    }

    Nodes parse_product()
    {
        Nodes lhs = parse_operand();
        for (;;) {
            skip_space();
            if (peek() != '*') return lhs;
            ++pos_;
            join(lhs, parse_operand(), OpCode::Mul);
        }
    }

    Nodes parse_operand()
    {
        skip_space();
        const char c = peek();
        if (c == '\0') fail("expected an operand, found end of input");
        if (c == '(') {
            ++pos_;
            Nodes inner = parse_sum();
            expect_close();
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.'
            || (c == '-' && pos_ + 1 < text_.size()
                && (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) || text_[pos_ + 1] == '.'))) {
            return {Node::constant(parse_number())};
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size()
                && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            const std::string_view ident = text_.substr(start, pos_ - start);
            skip_space();
            if (peek() == '(') {
                auto op = op_from_name(ident);
                if (!op || arity(*op) != 1) {
                    pos_ = start;
                    fail("unknown operator '" + std::string(ident) + "'");
                }
                ++pos_;
                Nodes arg = parse_sum();
                expect_close();
                arg.push_back(Node::apply(*op));
                return arg;
            }
            return {Node::variable(resolve(ident, start))};
        }
        fail("expected an operand, found '" + std::string(1, c) + "'");
    }

    void expect_close()
    {
        skip_space();
        if (peek() != ')') {
            if (peek() == '\0') fail("expected ')', found end of input");
            fail("expected ')' or a binary operator, found '" + std::string(1, peek()) + "'");
        }
        ++pos_;
    }

    double parse_number()
    {
        const std::size_t start = pos_;
        if (peek() == '-') ++pos_;
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        if (peek() == '.') {
            ++pos_;
            while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        }
        if (peek() == 'e' || peek() == 'E') {
            std::size_t save = pos_;
            ++pos_;
            if (peek() == '+' || peek() == '-') ++pos_;
            if (!std::isdigit(static_cast<unsigned char>(peek()))) {
                pos_ = save;
            } else {
                while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
            }
        }
        double v = 0.0;
        const char* first = text_.data() + start;
        const char* last = text_.data() + pos_;
        auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc() || res.ptr != last) {
            pos_ = start;
            fail("malformed number '" + std::string(first, last) + "'");
        }
        if (!std::isfinite(v)) {
            pos_ = start;
            fail("constant out of range");
        }
        return v;
    }

    std::uint32_t resolve(std::string_view ident, std::size_t start)
    {
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (names_[i] == ident) return static_cast<std::uint32_t>(i);
        }
        if (ident.size() > 1 && ident[0] == 'x') {
            std::uint32_t idx = 0;
            auto res = std::from_chars(ident.data() + 1, ident.data() + ident.size(), idx);
            if (res.ec == std::errc() && res.ptr == ident.data() + ident.size()) return idx;
        }
        pos_ = start;
        fail("unknown variable '" + std::string(ident) + "'");
    }

    std::string_view text_;
    std::span<const std::string> names_;
    std::size_t pos_ = 0;
};

} // namespace detail

// Reads the expression grammar. Parentheses are optional on input (usual
// precedence, left associative); `names` maps identifiers to column indices,
// and x0, x1, ... are always accepted.
inline Expression parse(std::string_view text, std::span<const std::string> names = {})
{
    return detail::Parser(text, names).run();
}

} // namespace symdistill
