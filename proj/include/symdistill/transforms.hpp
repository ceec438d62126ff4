#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"
#include "parse.hpp"
#include "table.hpp"

namespace symdistill {

// A derived input column, e.g. r = sqrt((dx*dx) + (dy*dy)) + 0.01. The
// formula is kept as text so it can name columns created by earlier transforms.
struct VariableTransform {
    std::string new_name;
    std::string formula;
};

// Splits "name=formula".
inline VariableTransform parse_transform(std::string_view text)
{
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError("transform '" + std::string(text) + "' is not of the form name=expression");
    }
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
        return std::string(s);
    };
    VariableTransform t{trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
    if (t.new_name.empty() || t.formula.empty()) {
        throw ConfigError("transform '" + std::string(text) + "' is not of the form name=expression");
    }
    return t;
}

struct TransformOptions {
    std::vector<std::string> drop;
    bool strict = true;
};

// Returns a copy of `table` with one input column appended per transform,
// evaluated in order, then with the `drop` columns removed. In strict mode a
// non-finite derived value is an error listing the offending rows.
inline IOTable apply_transforms(const IOTable& table, const std::vector<VariableTransform>& transforms,
    const TransformOptions& options = {})
{
    IOTable out = table;
    for (const auto& t : transforms) {
        if (out.input_index(t.new_name) >= 0 || std::find(out.output_names.begin(), out.output_names.end(), t.new_name)
                != out.output_names.end()) {
            throw StructuralError("transform target '" + t.new_name + "' already exists");
        }
        Expression formula;
        try {
            formula = parse(t.formula, out.input_names);
        } catch (const ParseError& e) {
            throw StructuralError("transform '" + t.new_name + "': " + e.what());
        }
        const auto values = eval_batch(formula, out.x);
        if (options.strict) {
            std::vector<std::size_t> bad;
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (!std::isfinite(values[i])) bad.push_back(i);
            }
            if (!bad.empty()) {
                std::string rows;
                for (std::size_t k = 0; k < bad.size() && k < 20; ++k) {
                    rows += (k == 0 ? "" : ", ") + std::to_string(bad[k]);
                }
                if (bad.size() > 20) rows += ", ... (" + std::to_string(bad.size()) + " rows)";
                throw DataError("transform '" + t.new_name + "' is non-finite at rows " + rows);
            }
        }
        Matrix widened(out.x.rows(), out.x.cols() + 1);
        for (std::size_t r = 0; r < out.x.rows(); ++r) {
            for (std::size_t c = 0; c < out.x.cols(); ++c) widened(r, c) = out.x(r, c);
            widened(r, out.x.cols()) = values[r];
        }
        out.x = std::move(widened);
        out.input_names.push_back(t.new_name);
    }

    if (!options.drop.empty()) {
        std::set<std::string> drop(options.drop.begin(), options.drop.end());
        for (const auto& name : drop) {
            if (out.input_index(name) < 0) throw StructuralError("cannot drop unknown column '" + name + "'");
        }
        std::vector<std::size_t> keep;
        for (std::size_t c = 0; c < out.input_names.size(); ++c) {
            if (drop.count(out.input_names[c]) == 0) keep.push_back(c);
        }
        if (keep.empty()) throw StructuralError("dropping every input column");
        Matrix narrowed(out.x.rows(), keep.size());
        std::vector<std::string> names;
        for (std::size_t k = 0; k < keep.size(); ++k) {
            names.push_back(out.input_names[keep[k]]);
            for (std::size_t r = 0; r < out.x.rows(); ++r) narrowed(r, k) = out.x(r, keep[k]);
        }
        out.x = std::move(narrowed);
        out.input_names = std::move(names);
    }
    return out;
}

} // namespace symdistill
