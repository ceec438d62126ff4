#pragma once

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "matrix.hpp"
#include "parse.hpp"

namespace symdistill {

// Recorded input/output rows of a block: X is n x d, Y is n x D. `weights`
// is empty except for weighted locales.
struct IOTable {
    std::vector<std::string> input_names;
    std::vector<std::string> output_names;
    Matrix x;
    Matrix y;
    std::vector<double> weights;

    [[nodiscard]] std::size_t rows() const noexcept { return x.rows(); }
    [[nodiscard]] std::size_t inputs() const noexcept { return input_names.size(); }
    [[nodiscard]] std::size_t outputs() const noexcept { return output_names.size(); }

    [[nodiscard]] std::ptrdiff_t input_index(const std::string& name) const
    {
        for (std::size_t i = 0; i < input_names.size(); ++i) {
            if (input_names[i] == name) return static_cast<std::ptrdiff_t>(i);
        }
        return -1;
    }

    void validate(bool allow_nonfinite = false) const
    {
        if (x.rows() != y.rows() && y.cols() > 0) {
            throw DataError("input block has " + std::to_string(x.rows()) + " rows, output block has "
                + std::to_string(y.rows()));
        }
        if (x.cols() != input_names.size()) {
            throw DataError("input block has " + std::to_string(x.cols()) + " columns for "
                + std::to_string(input_names.size()) + " input names");
        }
        if (y.cols() != output_names.size()) {
            throw DataError("output block has " + std::to_string(y.cols()) + " columns for "
                + std::to_string(output_names.size()) + " output names");
        }
        if (!weights.empty() && weights.size() != x.rows()) {
            throw DataError("weights hold " + std::to_string(weights.size()) + " values for "
                + std::to_string(x.rows()) + " rows");
        }
        auto unique = [](const std::vector<std::string>& names, const char* what) {
            std::set<std::string> seen;
            for (const auto& n : names) {
                if (n.empty()) throw DataError(std::string("empty ") + what + " name");
                if (!seen.insert(n).second) throw DataError(std::string("duplicate ") + what + " name '" + n + "'");
            }
        };
        unique(input_names, "input");
        unique(output_names, "output");
        if (!allow_nonfinite) {
            auto check = [](const Matrix& m, const char* what) {
                for (std::size_t r = 0; r < m.rows(); ++r) {
                    for (std::size_t c = 0; c < m.cols(); ++c) {
                        if (!std::isfinite(m(r, c))) {
                            throw DataError(std::string("non-finite ") + what + " value at row " + std::to_string(r)
                                + ", column " + std::to_string(c));
                        }
                    }
                }
            };
            check(x, "input");
            check(y, "output");
        }
    }
};

struct LoadOptions {
    bool allow_nonfinite = false;
};

namespace detail {

inline void write_f64le(const std::filesystem::path& path, const std::vector<double>& values)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    std::vector<unsigned char> bytes(values.size() * 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto bits = std::bit_cast<std::uint64_t>(values[i]);
        for (int b = 0; b < 8; ++b) bytes[i * 8 + static_cast<std::size_t>(b)] = static_cast<unsigned char>(bits >> (8 * b));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("short write to " + path.string());
}

inline std::vector<double> read_f64le(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % 8 != 0) {
        throw DataError(path.filename().string() + " holds " + std::to_string(bytes.size())
            + " bytes, not a whole number of f64 values");
    }
    std::vector<double> values(bytes.size() / 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + static_cast<std::size_t>(b)]) << (8 * b);
        values[i] = std::bit_cast<double>(bits);
    }
    return values;
}

inline Matrix read_block(const std::filesystem::path& path, std::size_t rows, std::size_t cols)
{
    if (cols == 0) return Matrix(rows, 0);
    auto values = read_f64le(path);
    if (values.size() % cols != 0) {
        throw DataError(path.filename().string() + " holds " + std::to_string(values.size())
            + " values, not a multiple of " + std::to_string(cols) + " columns");
    }
    const std::size_t got = values.size() / cols;
    if (got != rows) {
        throw DataError("manifest declares " + std::to_string(rows) + " rows but " + path.filename().string()
            + " holds " + std::to_string(got) + " rows");
    }
    return Matrix(rows, cols, std::move(values));
}

inline std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_cell(const std::string& text, std::size_t line, std::size_t col)
{
    const std::string t = trim(text);
    double v = 0.0;
    if (t == "nan" || t == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (t == "inf" || t == "Inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf" || t == "-Inf") return -std::numeric_limits<double>::infinity();
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw DataError("line " + std::to_string(line) + ", column " + std::to_string(col + 1) + ": cannot parse '"
            + t + "' as a number");
    }
    return v;
}

inline IOTable load_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw DataError(path.string() + " is empty");
    const auto cols = split(trim(header), ',');
    IOTable t;
    std::vector<int> role; // 0 input, 1 output, 2 weight
    for (const auto& raw : cols) {
        const auto c = trim(raw);
        if (c.rfind("in:", 0) == 0) {
            t.input_names.push_back(c.substr(3));
            role.push_back(0);
        } else if (c.rfind("out:", 0) == 0) {
            t.output_names.push_back(c.substr(4));
            role.push_back(1);
        } else if (c == "weight") {
            role.push_back(2);
        } else {
            throw DataError("CSV column '" + c + "' is neither in:<name> nor out:<name>");
        }
    }
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> ws;
    std::string line;
    std::size_t lineno = 1;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split(trim(line), ',');
        if (cells.size() != cols.size()) {
            throw DataError("line " + std::to_string(lineno) + " has " + std::to_string(cells.size())
                + " fields, header has " + std::to_string(cols.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const double v = parse_cell(cells[c], lineno, c);
            (role[c] == 0 ? xs : role[c] == 1 ? ys : ws).push_back(v);
        }
        ++n;
    }
    t.x = Matrix(n, t.input_names.size(), std::move(xs));
    t.y = Matrix(n, t.output_names.size(), std::move(ys));
    t.weights = std::move(ws);
    return t;
}

} // namespace detail

// Reads a table directory (manifest.json + inputs.bin + outputs.bin, and
// weights.bin when present) or a CSV file with in:/out: headers.
inline IOTable load_table(const std::filesystem::path& path, const LoadOptions& options = {})
{
    namespace fs = std::filesystem;
    IOTable t;
    if (fs::is_directory(path)) {
        const auto manifest_path = path / "manifest.json";
        std::ifstream in(manifest_path);
        if (!in) throw DataError("no manifest.json in " + path.string());
        nlohmann::json m;
        try {
            in >> m;
        } catch (const nlohmann::json::exception& e) {
            throw DataError("malformed " + manifest_path.string() + ": " + e.what());
        }
        try {
            if (m.at("format_version").get<int>() != 1) throw DataError("unsupported format_version");
            if (m.at("dtype").get<std::string>() != "f64le") throw DataError("unsupported dtype");
            if (m.at("layout").get<std::string>() != "row-major") throw DataError("unsupported layout");
            const auto rows = m.at("rows").get<std::size_t>();
            t.input_names = m.at("input_names").get<std::vector<std::string>>();
            t.output_names = m.at("output_names").get<std::vector<std::string>>();
            t.x = detail::read_block(path / "inputs.bin", rows, t.input_names.size());
            t.y = detail::read_block(path / "outputs.bin", rows, t.output_names.size());
            if (fs::exists(path / "weights.bin")) {
                auto w = detail::read_f64le(path / "weights.bin");
                if (w.size() != rows) {
                    throw DataError("manifest declares " + std::to_string(rows) + " rows but weights.bin holds "
                        + std::to_string(w.size()) + " rows");
                }
                t.weights = std::move(w);
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError("bad manifest " + manifest_path.string() + ": " + e.what());
        }
    } else if (fs::is_regular_file(path)) {
        t = detail::load_csv(path);
    } else {
        throw DataError("no table at " + path.string());
    }
    t.validate(options.allow_nonfinite);
    return t;
}

inline void save_table(const IOTable& table, const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    table.validate(true);
    fs::create_directories(dir);
    nlohmann::ordered_json m;
    m["format_version"] = 1;
    m["rows"] = table.rows();
    m["input_names"] = table.input_names;
    m["output_names"] = table.output_names;
    m["dtype"] = "f64le";
    m["layout"] = "row-major";
    {
        std::ofstream out(dir / "manifest.json", std::ios::trunc);
        if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
        out << m.dump(2) << "\n";
    }
    detail::write_f64le(dir / "inputs.bin", table.x.values());
    detail::write_f64le(dir / "outputs.bin", table.y.values());
    if (!table.weights.empty()) {
        detail::write_f64le(dir / "weights.bin", table.weights);
    } else if (fs::exists(dir / "weights.bin")) {
        fs::remove(dir / "weights.bin");
    }
}

inline void save_csv(const IOTable& table, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    bool first = true;
    auto sep = [&] {
        if (!first) out << ',';
        first = false;
    };
    for (const auto& n : table.input_names) {
        sep();
        out << "in:" << n;
    }
    for (const auto& n : table.output_names) {
        sep();
        out << "out:" << n;
    }
    if (!table.weights.empty()) {
        sep();
        out << "weight";
    }
    out << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        first = true;
        for (double v : table.x.row(r)) {
            sep();
            out << format_double(v);
        }
        for (double v : table.y.row(r)) {
            sep();
            out << format_double(v);
        }
        if (!table.weights.empty()) {
            sep();
            out << format_double(table.weights[r]);
        }
        out << '\n';
    }
}

} // namespace symdistill
