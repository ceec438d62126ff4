#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "config.hpp"
#include "expr.hpp"
#include "loss.hpp"
#include "rng.hpp"

namespace symdistill {

struct SimplexResult {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    int evaluations = 0;
};

// Downhill simplex minimisation (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2). Stops after `max_evaluations` objective calls, once the
// simplex has collapsed, or once it is small and its values agree.
inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
    std::vector<double> start, int max_evaluations)
{
    const std::size_t n = start.size();
    SimplexResult result;
    if (n == 0) {
        result.x = start;
        result.value = objective(start);
        result.evaluations = 1;
        return result;
    }

    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) {
        const double step = start[i] == 0.0 ? 0.1 : 0.1 * std::abs(start[i]) + 0.01;
        simplex[i + 1][i] += step;
    }
    std::vector<double> values(n + 1);
    int evals = 0;
    auto f = [&](const std::vector<double>& x) {
        ++evals;
        const double v = objective(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    for (std::size_t i = 0; i <= n && evals < max_evaluations; ++i) values[i] = f(simplex[i]);
    if (evals < static_cast<int>(n + 1)) {
        for (std::size_t i = static_cast<std::size_t>(evals); i <= n; ++i) {
            values[i] = std::numeric_limits<double>::infinity();
        }
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n);
    std::vector<double> trial(n);
    std::vector<double> trial2(n);

    while (evals < max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        // Collapse test: all vertices (nearly) equal in position.
        double spread = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                spread = std::max(spread, std::abs(simplex[i][k] - simplex[best][k]) / (1.0 + std::abs(simplex[best][k])));
            }
        }
        if (spread < 1e-13) break;
        // Converged: vertex values agree and the simplex is small.
        const double fspread = values[worst] - values[best];
        if (spread < 1e-6 && fspread <= 1e-10 * std::abs(values[best]) + 1e-300) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k];
        }
        for (auto& c : centroid) c /= static_cast<double>(n);

        for (std::size_t k = 0; k < n; ++k) trial[k] = centroid[k] + (centroid[k] - simplex[worst][k]);
        const double fr = f(trial);
        if (fr < values[best]) {
            if (evals >= max_evaluations) {
                simplex[worst] = trial;
                values[worst] = fr;
                break;
            }
            for (std::size_t k = 0; k < n; ++k) trial2[k] = centroid[k] + 2.0 * (centroid[k] - simplex[worst][k]);
            const double fe = f(trial2);
            if (fe < fr) {
                simplex[worst] = trial2;
                values[worst] = fe;
            } else {
                simplex[worst] = trial;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = trial;
            values[worst] = fr;
            continue;
        }
        if (evals >= max_evaluations) break;
        // Contraction, outside or inside depending on the reflected point.
        const bool outside = fr < values[worst];
        for (std::size_t k = 0; k < n; ++k) {
            trial2[k] = outside ? centroid[k] + 0.5 * (trial[k] - centroid[k])
                                : centroid[k] + 0.5 * (simplex[worst][k] - centroid[k]);
        }
        const double fc = f(trial2);
        if (fc < std::min(fr, values[worst])) {
            simplex[worst] = trial2;
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n && evals < max_evaluations; ++i) {
            if (i == best) continue;
            for (std::size_t k = 0; k < n; ++k) simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
            values[i] = f(simplex[i]);
        }
    }

    const auto best_it = std::min_element(values.begin(), values.end());
    const auto best_idx = static_cast<std::size_t>(best_it - values.begin());
    result.x = simplex[best_idx];
    result.value = values[best_idx];
    result.evaluations = evals;
    return result;
}

// Tunes the constants of `expr` by Nelder-Mead from the current values, then
// from `restarts` randomly perturbed starting points. Returns the input when
// nothing improves on its loss, so the loss never increases.
inline Expression optimize_constants(const Expression& expr, LossFunction& loss, Rng& rng,
    const ConstantOptimizerOptions& options = {}, double* final_loss = nullptr)
{
    const auto start = expr.constants();
    const double start_loss = loss(expr);
    if (start.empty()) {
        if (final_loss != nullptr) *final_loss = start_loss;
        return expr;
    }

    auto objective = [&](const std::vector<double>& c) { return loss(expr.with_constants(c)); };

    std::vector<double> best = start;
    double best_loss = start_loss;
    for (int attempt = 0; attempt <= options.restarts; ++attempt) {
        std::vector<double> init = attempt == 0 ? start : best;
        if (attempt > 0) {
            for (auto& c : init) c *= 1.0 + 0.5 * rng.normal();
        }
        auto r = nelder_mead(objective, init, options.max_evaluations);
        if (r.value < best_loss) {
            best_loss = r.value;
            best = r.x;
        }
        if (best_loss == 0.0) break;
    }
    if (final_loss != nullptr) *final_loss = best_loss;
    if (!(best_loss < start_loss)) {
        if (final_loss != nullptr) *final_loss = start_loss;
        return expr;
    }
    return expr.with_constants(best);
}

// Convenience overload on a plain dataset.
inline Expression optimize_constants(const Expression& expr, const Matrix& x, std::span<const double> y, Rng& rng,
    const ConstantOptimizerOptions& options = {})
{
    auto problem = std::make_shared<const Problem>(x, std::vector<double>(y.begin(), y.end()));
    LossFunction loss(problem);
    return optimize_constants(expr, loss, rng, options);
}

} // namespace symdistill
