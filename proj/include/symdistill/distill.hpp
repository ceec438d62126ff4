#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "evolve.hpp"
#include "pareto.hpp"
#include "parse.hpp"
#include "table.hpp"

namespace symdistill {

struct FitResult {
    std::vector<ParetoFront> fronts;        // one per output dimension
    std::vector<std::size_t> best_index;    // into the matching front
    std::vector<EvolveStats> stats;
    double wall_seconds = 0.0;
    SRConfig config;
    std::uint64_t seed = 0;
};

namespace detail {

template <typename E>
[[noreturn]] void rethrow_tagged(const E& e, std::size_t dim)
{
    throw E("output dimension " + std::to_string(dim) + ": " + e.what());
}

} // namespace detail

// Fits output dimension j of `table` with seed config.seed + j. Row weights
// in the table, when present, weight the data loss.
inline FitResult fit_table(const IOTable& table, const SRConfig& config)
{
    config.validate();
    if (table.outputs() == 0) throw StructuralError("table has no output columns");
    const auto started = std::chrono::steady_clock::now();
    const ColumnData columns(table.x);
    FitResult result;
    result.config = config;
    result.seed = config.seed;
    for (std::size_t j = 0; j < table.outputs(); ++j) {
        SRConfig dim_config = config;
        dim_config.seed = config.seed + j;
        try {
            auto problem = std::make_shared<const Problem>(columns, table.y.column(j), table.weights, config.loss);
            auto r = evolve(std::move(problem), dim_config);
            result.best_index.push_back(select_best(r.front));
            result.fronts.push_back(std::move(r.front));
            result.stats.push_back(std::move(r.stats));
        } catch (const ConfigError& e) {
            detail::rethrow_tagged(e, j);
        } catch (const DataError& e) {
            detail::rethrow_tagged(e, j);
        } catch (const StructuralError& e) {
            detail::rethrow_tagged(e, j);
        }
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

inline std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string front_csv(const ParetoFront& front, std::span<const std::string> names)
{
    const auto scores = front_scores(front);
    std::ostringstream out;
    out << "complexity,loss,score,equation\n";
    for (std::size_t i = 0; i < front.size(); ++i) {
        out << front[i].complexity << ',' << format_double(front[i].loss) << ',' << format_double(scores[i]) << ','
            << csv_field(render(front[i].expr, names)) << '\n';
    }
    return out.str();
}

struct FrontRow {
    int complexity = 0;
    double loss = 0.0;
    double score = 0.0;
    std::string equation;
};

// Reads a front.csv as written by distill (the score column is optional).
inline std::vector<FrontRow> read_front_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + " is empty");
    const auto header = detail::split(detail::trim(line), ',');
    const bool has_score = header.size() == 4;
    if (!(header.size() == 3 || has_score) || header[0] != "complexity" || header[1] != "loss") {
        throw DataError(path.string() + ": expected header complexity,loss[,score],equation");
    }
    std::vector<FrontRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::trim(line);
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    cur += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',' && fields.size() + 1 < header.size()) {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        fields.push_back(cur);
        if (fields.size() != header.size()) {
            throw DataError(path.string() + ": line " + std::to_string(lineno) + " has " + std::to_string(fields.size())
                + " fields");
        }
        FrontRow r;
        r.complexity = static_cast<int>(detail::parse_cell(fields[0], lineno, 0));
        r.loss = detail::parse_cell(fields[1], lineno, 1);
        r.score = has_score ? detail::parse_cell(fields[2], lineno, 2) : 0.0;
        r.equation = detail::trim(fields.back());
        rows.push_back(std::move(r));
    }
    return rows;
}

struct DistillResult {
    FitResult fit;
    std::vector<std::filesystem::path> run_dirs; // one per output dimension
};

// Fits every output dimension and writes
// <out_dir>/SR_output/<block>/dim_<j>/<timestamp>/{front.csv,best.txt}.
inline DistillResult distill(const IOTable& table, const SRConfig& config, const std::filesystem::path& out_dir,
    const std::string& block_name = "block", std::string timestamp = {})
{
    namespace fs = std::filesystem;
    if (block_name.empty() || block_name.find('/') != std::string::npos) {
        throw ConfigError("invalid block name '" + block_name + "'");
    }
    DistillResult out;
    out.fit = fit_table(table, config);
    if (timestamp.empty()) timestamp = utc_timestamp();
    for (std::size_t j = 0; j < out.fit.fronts.size(); ++j) {
        const auto dim_dir = out_dir / "SR_output" / block_name / ("dim_" + std::to_string(j));
        auto run_dir = dim_dir / timestamp;
        for (int k = 1; fs::exists(run_dir); ++k) run_dir = dim_dir / (timestamp + "_" + std::to_string(k));
        fs::create_directories(run_dir);
        const auto& front = out.fit.fronts[j];
        {
            std::ofstream f(run_dir / "front.csv", std::ios::trunc);
            if (!f) throw DataError("cannot write " + (run_dir / "front.csv").string());
            f << front_csv(front, table.input_names);
        }
        {
            std::ofstream f(run_dir / "best.txt", std::ios::trunc);
            if (!f) throw DataError("cannot write " + (run_dir / "best.txt").string());
            if (!front.empty()) f << render(front[out.fit.best_index[j]].expr, table.input_names) << '\n';
        }
        out.run_dirs.push_back(run_dir);
    }
    return out;
}

} // namespace symdistill
