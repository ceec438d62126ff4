#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "table.hpp"

namespace symdistill {

struct DimImportance {
    std::size_t dim = 0;
    double variance = 0.0;
};

// Sample variance (n - 1) of each column, most variable first; ties keep the
// lower index first.
inline std::vector<DimImportance> column_importance(const Matrix& y)
{
    const std::size_t n = y.rows();
    if (n < 2) throw StructuralError("importance needs at least 2 rows, got " + std::to_string(n));
    std::vector<DimImportance> out;
    for (std::size_t j = 0; j < y.cols(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += y(i, j);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = y(i, j) - mean;
            ss += d * d;
        }
        out.push_back({j, ss / static_cast<double>(n - 1)});
    }
    std::stable_sort(out.begin(), out.end(),
        [](const DimImportance& a, const DimImportance& b) { return a.variance > b.variance; });
    return out;
}

inline std::vector<DimImportance> get_importance(const IOTable& table) { return column_importance(table.y); }

// Cosine-annealed count of kept output dimensions, reaching the target once
// end_fraction of the steps have elapsed.
struct PruneSchedule {
    int total_steps = 1;
    double end_fraction = 0.65;
    int start_dims = 1;
    int target_dims = 1;

    void validate() const
    {
        if (total_steps < 1) throw ConfigError("total_steps must be >= 1");
        if (!(end_fraction > 0.0 && end_fraction <= 1.0)) throw ConfigError("end_fraction must lie in (0, 1]");
        if (target_dims < 0 || start_dims < target_dims) throw ConfigError("need 0 <= target_dims <= start_dims");
    }

    [[nodiscard]] int kept(int step) const
    {
        validate();
        if (step < 0 || step > total_steps) {
            throw ConfigError("step " + std::to_string(step) + " outside [0, " + std::to_string(total_steps) + "]");
        }
        const double progress = std::min(static_cast<double>(step) / (end_fraction * total_steps), 1.0);
        const double span = static_cast<double>(start_dims - target_dims);
        return target_dims + static_cast<int>(std::lround(span * (1.0 + std::cos(std::numbers::pi * progress)) / 2.0));
    }
};

// Keeps the kept(step) most important dimensions of `ranking`.
inline std::vector<bool> prune_mask(const PruneSchedule& schedule, int step, const std::vector<DimImportance>& ranking)
{
    const int k = schedule.kept(step);
    if (static_cast<std::size_t>(schedule.start_dims) > ranking.size()) {
        throw ConfigError("schedule starts at " + std::to_string(schedule.start_dims) + " dims but the ranking has "
            + std::to_string(ranking.size()));
    }
    std::vector<bool> mask(ranking.size(), false);
    for (int i = 0; i < k; ++i) mask[ranking[static_cast<std::size_t>(i)].dim] = true;
    return mask;
}

} // namespace symdistill
