#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "symdistill/symdistill.hpp"

namespace fs = std::filesystem;
using namespace symdistill;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

// Flags shared by every subcommand that runs the search.
struct SearchFlags {
    SRConfig config;
    std::vector<std::string> ops;
    std::vector<std::string> arg_limits;
    std::vector<std::string> op_complexities;
    std::string loss = "mse";
    std::string config_file;
    int threads = 0;

    void attach(CLI::App* app)
    {
        app->add_option("--config", config_file, "JSON config (e.g. the config block of a run manifest)");
        app->add_option("--ops", ops, "operators, e.g. + * inv sin exp")->delimiter(',');
        app->add_option("--iters", config.n_iterations, "evolution rounds")->capture_default_str();
        app->add_option("--parsimony", config.parsimony, "complexity penalty")->capture_default_str();
        app->add_option("--max-size", config.max_complexity, "largest complexity kept")->capture_default_str();
        app->add_option("--seed", config.seed, "master seed")->capture_default_str();
        app->add_option("--populations", config.n_populations)->capture_default_str();
        app->add_option("--population-size", config.population_size)->capture_default_str();
        app->add_option("--temperature", config.acceptance_temperature)->capture_default_str();
        app->add_option("--arg-limit", arg_limits, "op=N caps the complexity of op's arguments");
        app->add_option("--op-complexity", op_complexities, "op=N sets an operator's complexity");
        app->add_option("--loss", loss, "mse or mae")->capture_default_str();
        app->add_option("--threads", threads, "worker threads (SYMDISTILL_THREADS when unset)");
    }

    [[nodiscard]] SRConfig resolve(const CLI::App* app) const
    {
        SRConfig c = config;
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in) throw ConfigError("cannot read --config " + config_file);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("--config " + config_file + ": " + e.what());
            }
            if (j.contains("config")) j = j.at("config");
            c = config_from_json(j);
            // Explicit flags win over the file.
            if (app->count("--iters") > 0) c.n_iterations = config.n_iterations;
            if (app->count("--parsimony") > 0) c.parsimony = config.parsimony;
            if (app->count("--max-size") > 0) c.max_complexity = config.max_complexity;
            if (app->count("--seed") > 0) c.seed = config.seed;
            if (app->count("--populations") > 0) c.n_populations = config.n_populations;
            if (app->count("--population-size") > 0) c.population_size = config.population_size;
            if (app->count("--temperature") > 0) c.acceptance_temperature = config.acceptance_temperature;
        }
        if (!ops.empty()) c.ops = OperatorSet::from_names(ops);
        auto apply_pairs = [&](const std::vector<std::string>& pairs, const char* flag, auto setter) {
            for (const auto& p : pairs) {
                const auto eq = p.find('=');
                if (eq == std::string::npos) throw ConfigError(std::string(flag) + " expects op=N, got '" + p + "'");
                const auto name = p.substr(0, eq);
                const auto code = op_from_name(name);
                if (!code) throw ConfigError(std::string(flag) + ": unknown operator '" + name + "'");
                if (!c.ops.contains(*code)) throw ConfigError(std::string(flag) + ": operator '" + name + "' not enabled");
                int value = 0;
                try {
                    value = std::stoi(p.substr(eq + 1));
                } catch (const std::exception&) {
                    throw ConfigError(std::string(flag) + ": bad number in '" + p + "'");
                }
                setter(c.ops.at(*code), value);
            }
        };
        apply_pairs(arg_limits, "--arg-limit", [](Operator& op, int v) { op.arg_complexity_limit = v; });
        apply_pairs(op_complexities, "--op-complexity", [](Operator& op, int v) { op.complexity = v; });
        if (loss == "mse") {
            c.loss = LossKind::MSE;
        } else if (loss == "mae") {
            c.loss = LossKind::MAE;
        } else {
            throw ConfigError("--loss must be mse or mae");
        }
        c.threads = threads;
        if (c.threads <= 0) {
            if (const char* env = std::getenv("SYMDISTILL_THREADS")) c.threads = std::atoi(env);
        }
        if (c.threads <= 0) c.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        c.validate();
        // Re-validate the operator tweaks.
        OperatorSet check;
        for (const auto& op : c.ops.operators()) check.add(op);
        return c;
    }
};

IOTable load_or_fail(const std::string& path)
{
    if (path.empty()) throw ConfigError("--data is required");
    return load_table(path);
}

std::vector<Expression> load_bank(const std::string& path, const std::vector<std::string>& names)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot read expression bank " + path);
    std::vector<Expression> bank;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            bank.push_back(parse(line, names));
        } catch (const ParseError& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (bank.empty()) throw DataError("expression bank " + path + " is empty");
    return bank;
}

void print_fit(const IOTable& table, const FitResult& fit)
{
    fmt::print("{:>4}  {:<12} {:>10} {:>14} {:>10}  {}\n", "dim", "output", "complexity", "loss", "score", "equation");
    for (std::size_t j = 0; j < fit.fronts.size(); ++j) {
        const auto& front = fit.fronts[j];
        if (front.empty()) {
            fmt::print("{:>4}  {:<12} {:>10} {:>14} {:>10}  {}\n", j, table.output_names[j], "-", "-", "-", "(empty front)");
            continue;
        }
        const auto scores = front_scores(front);
        const auto b = fit.best_index[j];
        fmt::print("{:>4}  {:<12} {:>10} {:>14.6e} {:>10.4f}  {}\n", j, table.output_names[j], front[b].complexity,
            front[b].loss, scores[b], render(front[b].expr, table.input_names));
    }
}

nlohmann::ordered_json table_echo(const IOTable& t)
{
    return {{"rows", t.rows()}, {"input_names", t.input_names}, {"output_names", t.output_names}};
}

// distill ------------------------------------------------------------------

struct DistillFlags {
    std::string data;
    std::string out;
    std::string block = "block";
    std::vector<std::string> transforms;
    std::vector<std::string> drop;
    SearchFlags search;
};

int run_distill(const DistillFlags& f, const CLI::App* app)
{
    const auto config = f.search.resolve(app);
    auto table = load_or_fail(f.data);
    std::vector<VariableTransform> transforms;
    for (const auto& t : f.transforms) transforms.push_back(parse_transform(t));
    TransformOptions topts;
    topts.drop = f.drop;
    table = apply_transforms(table, transforms, topts);

    auto result = distill(table, config, f.out, f.block);
    print_fit(table, result.fit);

    RunManifest m;
    m.subcommand = "distill";
    m.config = config_to_json(config);
    m.seed = config.seed;
    m.inputs = {f.data};
    m.output_dir = f.out;
    m.extra["block"] = f.block;
    m.extra["transforms"] = f.transforms;
    m.extra["drop"] = f.drop;
    m.extra["table"] = table_echo(table);
    m.write(f.out);
    for (const auto& dir : result.run_dirs) m.write(dir);
    return 0;
}

// slime --------------------------------------------------------------------

struct SlimeFlags {
    std::string data;
    std::string out;
    std::vector<double> at;
    int neighbors = 0;
    int synthetic = 0;
    double m_weight = 1.0;
    std::vector<double> sigma2;
    double kernel_sigma2 = 0.0;
    std::string surrogate;
    std::uint64_t locale_seed = 0;
    SearchFlags search;
};

int run_slime(const SlimeFlags& f, const CLI::App* app)
{
    if (f.neighbors < 1) throw ConfigError("--neighbors must be >= 1");
    if (f.synthetic < 0) throw ConfigError("--synthetic must be >= 0");
    const auto config = f.search.resolve(app);
    const auto table = load_or_fail(f.data);
    if (f.at.size() != table.inputs()) {
        throw ConfigError("--at has " + std::to_string(f.at.size()) + " values, the table has "
            + std::to_string(table.inputs()) + " inputs");
    }
    SlimeParams p;
    p.x_star = f.at;
    p.neighbors = static_cast<std::size_t>(f.neighbors);
    p.n_synthetic = static_cast<std::size_t>(f.synthetic);
    p.neighbor_weight = f.m_weight;
    if (!f.sigma2.empty()) p.sigma2 = f.sigma2;
    if (app->count("--kernel-sigma2") > 0) p.kernel_sigma2 = f.kernel_sigma2;

    BlackBox callback;
    if (!f.surrogate.empty()) {
        auto bank = load_bank(f.surrogate, table.input_names);
        if (bank.size() != table.outputs()) {
            throw DataError("surrogate bank has " + std::to_string(bank.size()) + " expressions for "
                + std::to_string(table.outputs()) + " outputs");
        }
        callback = [bank](std::span<const double> z) {
            std::vector<double> out;
            for (const auto& e : bank) out.push_back(eval_point(e, z));
            return out;
        };
    } else if (p.n_synthetic > 0) {
        throw DataError("--synthetic needs --surrogate to label the sampled points");
    }

    Rng rng(f.locale_seed);
    const auto locale = build_locale(table, p, rng, callback);
    save_table(locale, fs::path(f.out) / "locale");
    auto result = distill(locale, config, f.out, "slime");
    print_fit(locale, result.fit);

    RunManifest m;
    m.subcommand = "slime";
    m.config = config_to_json(config);
    m.seed = config.seed;
    m.inputs = {f.data};
    if (!f.surrogate.empty()) m.inputs.push_back(f.surrogate);
    m.output_dir = f.out;
    m.extra["at"] = f.at;
    m.extra["neighbors"] = f.neighbors;
    m.extra["synthetic"] = f.synthetic;
    m.extra["M"] = f.m_weight;
    m.extra["sigma2"] = f.sigma2;
    m.extra["locale_seed"] = f.locale_seed;
    m.write(f.out);
    for (const auto& dir : result.run_dirs) m.write(dir);
    return 0;
}

// pca ----------------------------------------------------------------------

struct PcaFlags {
    std::string data;
    std::string model;
    std::string out;
    std::string block = "inputs";
    std::size_t k = 0;
};

const Matrix& pick_block(const IOTable& t, const std::string& block)
{
    if (block == "inputs") return t.x;
    if (block == "outputs") return t.y;
    throw ConfigError("--block must be inputs or outputs");
}

int run_pca_fit(const PcaFlags& f)
{
    const auto table = load_or_fail(f.data);
    const auto& m = pick_block(table, f.block);
    if (f.k < 1 || f.k > std::min(m.rows() - 1, m.cols())) {
        throw ConfigError("--k must lie in [1, " + std::to_string(std::min(m.rows() - 1, m.cols())) + "]");
    }
    const auto model = pca_fit(m, f.k);
    save_pca(model, f.out);
    std::vector<double> ratio;
    if (model.total_variance > 0.0) ratio = explained_variance_ratio(model);
    fmt::print("{:>4} {:>16} {:>10}\n", "pc", "variance", "ratio");
    for (std::size_t i = 0; i < model.k(); ++i) {
        fmt::print("{:>4} {:>16.8e} {:>10.6f}\n", i, model.explained_variance[i], ratio.empty() ? 0.0 : ratio[i]);
    }
    RunManifest rm;
    rm.subcommand = "pca fit";
    rm.inputs = {f.data};
    rm.output_dir = f.out;
    rm.config = {{"k", f.k}, {"block", f.block}};
    rm.write(f.out);
    return 0;
}

std::vector<std::string> numbered(const char* prefix, std::size_t n)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

int run_pca_apply(const PcaFlags& f, bool inverse)
{
    if (f.model.empty()) throw ConfigError("--model is required");
    const auto model = load_pca(f.model);
    auto table = load_or_fail(f.data);
    const bool inputs = f.block == "inputs";
    (void)pick_block(table, f.block);
    auto& m = inputs ? table.x : table.y;
    auto& names = inputs ? table.input_names : table.output_names;
    m = inverse ? reconstruct(model, m) : project(model, m);
    names = inverse ? numbered(inputs ? "x" : "y", model.d()) : numbered("pc", model.k());
    save_table(table, f.out);
    RunManifest rm;
    rm.subcommand = inverse ? "pca reconstruct" : "pca apply";
    rm.inputs = {f.model, f.data};
    rm.output_dir = f.out;
    rm.config = {{"block", f.block}};
    rm.write(f.out);
    return 0;
}

// importance ---------------------------------------------------------------

int run_importance(const std::string& data, const std::string& out)
{
    const auto table = load_or_fail(data);
    const auto ranking = get_importance(table);
    fmt::print("{:>4} {:>4} {:<16} {:>16}\n", "rank", "dim", "output", "variance");
    for (std::size_t r = 0; r < ranking.size(); ++r) {
        fmt::print("{:>4} {:>4} {:<16} {:>16.8e}\n", r, ranking[r].dim, table.output_names[ranking[r].dim],
            ranking[r].variance);
    }
    if (!out.empty()) {
        std::ofstream f(out, std::ios::trunc);
        if (!f) throw DataError("cannot write " + out);
        f << "rank,dim,output,variance\n";
        for (std::size_t r = 0; r < ranking.size(); ++r) {
            f << r << ',' << ranking[r].dim << ',' << table.output_names[ranking[r].dim] << ','
              << format_double(ranking[r].variance) << '\n';
        }
    }
    return 0;
}

// gen ----------------------------------------------------------------------

struct GenFlags {
    std::string kind;
    std::size_t n = 5000;
    std::uint64_t seed = 0;
    std::string out;
    double alpha = 0.2;
    double softening = 1e-2;
    bool csv = false;
};

int run_gen(const GenFlags& f)
{
    Rng rng(f.seed);
    IOTable table;
    if (f.kind == "heat") {
        table = gen_heat(f.n, f.alpha, rng);
    } else {
        table = gen_pairwise(ForceLaw{force_kind_from_name(f.kind), f.softening}, f.n, rng);
    }
    if (f.csv) {
        const std::filesystem::path dest(f.out);
        if (dest.has_parent_path()) std::filesystem::create_directories(dest.parent_path());
        save_csv(table, f.out);
        return 0;
    }
    save_table(table, f.out);
    RunManifest rm;
    rm.subcommand = "gen " + f.kind;
    rm.seed = f.seed;
    rm.output_dir = f.out;
    rm.config = {{"n", f.n}, {"alpha", f.alpha}, {"softening", f.softening}};
    rm.write(f.out);
    return 0;
}

// eval ---------------------------------------------------------------------

int run_eval(const std::string& expr_path, const std::string& data, const std::string& out)
{
    const auto table = load_or_fail(data);
    const auto bank = load_bank(expr_path, table.input_names);
    for (const auto& e : bank) check_variables(e, table.inputs());
    std::vector<std::vector<double>> preds;
    for (const auto& e : bank) preds.push_back(eval_batch(e, table.x));

    std::ofstream f(out, std::ios::trunc);
    if (!f) throw DataError("cannot write " + out);
    for (std::size_t j = 0; j < bank.size(); ++j) f << (j == 0 ? "" : ",") << "pred_" << j;
    f << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t j = 0; j < bank.size(); ++j) f << (j == 0 ? "" : ",") << format_double(preds[j][r]);
        f << '\n';
    }

    fmt::print("{:>4} {:<12} {:>14} {:>14} {:>8}\n", "dim", "output", "rmse", "max_abs", "nan");
    for (std::size_t j = 0; j < bank.size() && j < table.outputs(); ++j) {
        double ss = 0.0;
        double worst = 0.0;
        std::size_t nans = 0;
        std::size_t used = 0;
        for (std::size_t r = 0; r < table.rows(); ++r) {
            const double d = preds[j][r] - table.y(r, j);
            if (!std::isfinite(d)) {
                ++nans;
                continue;
            }
            ss += d * d;
            worst = std::max(worst, std::abs(d));
            ++used;
        }
        const double rmse = used > 0 ? std::sqrt(ss / static_cast<double>(used)) : std::nan("");
        fmt::print("{:>4} {:<12} {:>14.6e} {:>14.6e} {:>8}\n", j, table.output_names[j], rmse, worst, nans);
    }
    return 0;
}

// report -------------------------------------------------------------------

int run_report(const std::string& run)
{
    std::vector<fs::path> files;
    if (fs::is_regular_file(run)) {
        files.push_back(run);
    } else if (fs::is_directory(run)) {
        for (const auto& e : fs::recursive_directory_iterator(run)) {
            if (e.is_regular_file() && e.path().filename() == "front.csv") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
    }
    if (files.empty()) throw DataError("no front.csv under " + run);

    for (const auto& file : files) {
        const auto rows = read_front_csv(file);
        std::vector<int> c;
        std::vector<double> l;
        for (const auto& r : rows) {
            c.push_back(r.complexity);
            l.push_back(r.loss);
        }
        const auto scores = front_scores(c, l);
        const auto best = select_best(c, l);
        fmt::print("{}\n", file.string());
        fmt::print("  {:>10} {:>14} {:>10}  {}\n", "complexity", "loss", "score", "equation");
        for (std::size_t i = 0; i < rows.size(); ++i) {
            fmt::print("{} {:>10} {:>14.6e} {:>10.6f}  {}\n", i == best ? '*' : ' ', rows[i].complexity, rows[i].loss,
                scores[i], rows[i].equation);
        }
        const auto curve = file.parent_path() / "score_curve.csv";
        std::ofstream f(curve, std::ios::trunc);
        if (!f) throw DataError("cannot write " + curve.string());
        f << "complexity,score,best\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            f << rows[i].complexity << ',' << format_double(scores[i]) << ',' << (i == best ? 1 : 0) << '\n';
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Symbolic distillation: fit closed-form expressions to recorded input/output data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    DistillFlags distill_flags;
    auto* distill_cmd = app.add_subcommand("distill", "fit one Pareto front per output column");
    distill_cmd->add_option("--data", distill_flags.data, "table directory or CSV")->required();
    distill_cmd->add_option("--out", distill_flags.out, "output directory")->required();
    distill_cmd->add_option("--block", distill_flags.block, "block name in SR_output")->capture_default_str();
    distill_cmd->add_option("--transform", distill_flags.transforms, "derived column, name=expression");
    distill_cmd->add_option("--drop", distill_flags.drop, "input column to leave out")->delimiter(',');
    distill_flags.search.attach(distill_cmd);

    SlimeFlags slime_flags;
    auto* slime_cmd = app.add_subcommand("slime", "local symbolic surrogate around one point");
    slime_cmd->add_option("--data", slime_flags.data)->required();
    slime_cmd->add_option("--out", slime_flags.out)->required();
    slime_cmd->add_option("--at", slime_flags.at, "point of interest, comma separated")->delimiter(',')->required();
    slime_cmd->add_option("--neighbors", slime_flags.neighbors, "nearest recorded rows")->required();
    slime_cmd->add_option("--synthetic", slime_flags.synthetic, "Gaussian samples")->capture_default_str();
    slime_cmd->add_option("--M", slime_flags.m_weight, "weight of recorded rows")->capture_default_str();
    slime_cmd->add_option("--sigma2", slime_flags.sigma2, "sampling variance, one value or one per input")
        ->delimiter(',');
    slime_cmd->add_option("--kernel-sigma2", slime_flags.kernel_sigma2, "proximity kernel bandwidth");
    slime_cmd->add_option("--surrogate", slime_flags.surrogate, "expression bank used to label synthetic points");
    slime_cmd->add_option("--locale-seed", slime_flags.locale_seed)->capture_default_str();
    slime_flags.search.attach(slime_cmd);

    PcaFlags pca_flags;
    auto* pca_cmd = app.add_subcommand("pca", "principal component reduction");
    pca_cmd->require_subcommand(1);
    auto* pca_fit_cmd = pca_cmd->add_subcommand("fit", "fit a model");
    pca_fit_cmd->add_option("--data", pca_flags.data)->required();
    pca_fit_cmd->add_option("--k", pca_flags.k, "components kept")->required();
    pca_fit_cmd->add_option("--out", pca_flags.out, "model directory")->required();
    pca_fit_cmd->add_option("--block", pca_flags.block, "inputs or outputs")->capture_default_str();
    auto* pca_apply_cmd = pca_cmd->add_subcommand("apply", "project a table block");
    auto* pca_rec_cmd = pca_cmd->add_subcommand("reconstruct", "map component scores back");
    for (auto* c : {pca_apply_cmd, pca_rec_cmd}) {
        c->add_option("--model", pca_flags.model)->required();
        c->add_option("--data", pca_flags.data)->required();
        c->add_option("--out", pca_flags.out)->required();
        c->add_option("--block", pca_flags.block, "inputs or outputs")->capture_default_str();
    }

    std::string imp_data;
    std::string imp_out;
    auto* imp_cmd = app.add_subcommand("importance", "rank output columns by sample variance");
    imp_cmd->add_option("--data", imp_data)->required();
    imp_cmd->add_option("--out", imp_out, "optional CSV");

    GenFlags gen_flags;
    auto* gen_cmd = app.add_subcommand("gen", "generate a benchmark table");
    gen_cmd->add_option("kind", gen_flags.kind, "heat, spring, inv_r, inv_r2 or charge")
        ->required()
        ->check(CLI::IsMember({"heat", "spring", "inv_r", "inv_r2", "charge"}));
    gen_cmd->add_option("--n", gen_flags.n)->capture_default_str();
    gen_cmd->add_option("--seed", gen_flags.seed)->capture_default_str();
    gen_cmd->add_option("--out", gen_flags.out)->required();
    gen_cmd->add_option("--alpha", gen_flags.alpha, "heat diffusivity")->capture_default_str();
    gen_cmd->add_option("--softening", gen_flags.softening)->capture_default_str();
    gen_cmd->add_flag("--csv", gen_flags.csv, "write a CSV file instead of a table directory");

    std::string eval_expr;
    std::string eval_data;
    std::string eval_out;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate an expression bank on a table");
    eval_cmd->add_option("--expr", eval_expr, "one expression per output, one per line")->required();
    eval_cmd->add_option("--data", eval_data)->required();
    eval_cmd->add_option("--out", eval_out, "predictions CSV")->required();

    std::string report_run;
    auto* report_cmd = app.add_subcommand("report", "print fronts with scores and write score_curve.csv");
    report_cmd->add_option("--run", report_run, "run directory or front.csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (distill_cmd->parsed()) return run_distill(distill_flags, distill_cmd);
        if (slime_cmd->parsed()) return run_slime(slime_flags, slime_cmd);
        if (pca_fit_cmd->parsed()) return run_pca_fit(pca_flags);
        if (pca_apply_cmd->parsed()) return run_pca_apply(pca_flags, false);
        if (pca_rec_cmd->parsed()) return run_pca_apply(pca_flags, true);
        if (imp_cmd->parsed()) return run_importance(imp_data, imp_out);
        if (gen_cmd->parsed()) return run_gen(gen_flags);
        if (eval_cmd->parsed()) return run_eval(eval_expr, eval_data, eval_out);
        if (report_cmd->parsed()) return run_report(report_run);
    } catch (const ConfigError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitConfig;
    } catch (const ParseError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitConfig;
    } catch (const std::runtime_error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitData;
    }
    return 0;
}
