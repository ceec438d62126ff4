#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "expr.hpp"

namespace symdistill {

struct FrontEntry {
    int complexity = 0;
    double loss = 0.0;
    Expression expr;
};

// Best expression per complexity level, with dominated entries removed:
// complexity strictly increases and loss strictly decreases along the list.
class ParetoFront {
public:
    ParetoFront() = default;

    static ParetoFront from_candidates(std::vector<FrontEntry> candidates)
    {
        std::stable_sort(candidates.begin(), candidates.end(), [](const FrontEntry& a, const FrontEntry& b) {
            if (a.complexity != b.complexity) return a.complexity < b.complexity;
            return a.loss < b.loss;
        });
        ParetoFront front;
        for (auto& c : candidates) {
            if (!std::isfinite(c.loss)) continue;
            if (!front.entries_.empty()) {
                const auto& last = front.entries_.back();
                if (c.complexity == last.complexity || c.loss >= last.loss) continue;
            }
            front.entries_.push_back(std::move(c));
        }
        return front;
    }

    [[nodiscard]] const std::vector<FrontEntry>& entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] const FrontEntry& operator[](std::size_t i) const noexcept { return entries_[i]; }

    [[nodiscard]] bool is_valid() const noexcept
    {
        for (std::size_t i = 1; i < entries_.size(); ++i) {
            if (entries_[i].complexity <= entries_[i - 1].complexity) return false;
            if (entries_[i].loss >= entries_[i - 1].loss) return false;
        }
        return true;
    }

    friend bool operator==(const ParetoFront& a, const ParetoFront& b)
    {
        if (a.entries_.size() != b.entries_.size()) return false;
        for (std::size_t i = 0; i < a.entries_.size(); ++i) {
            const auto& x = a.entries_[i];
            const auto& y = b.entries_[i];
            if (x.complexity != y.complexity || x.loss != y.loss || !(x.expr == y.expr)) return false;
        }
        return true;
    }

private:
    std::vector<FrontEntry> entries_;
};

inline constexpr double kLossFloor = 1e-15;

// Per-entry score: the drop in log loss per unit of added complexity relative
// to the previous entry. The first entry scores 0.
inline std::vector<double> front_scores(std::span<const int> complexities, std::span<const double> losses)
{
    std::vector<double> scores(complexities.size(), 0.0);
    for (std::size_t j = 1; j < complexities.size(); ++j) {
        const double prev = std::max(losses[j - 1], kLossFloor);
        const double cur = std::max(losses[j], kLossFloor);
        const int dc = std::max(complexities[j] - complexities[j - 1], 1);
        scores[j] = -std::log(cur / prev) / static_cast<double>(dc);
    }
    return scores;
}

inline std::vector<double> front_scores(const ParetoFront& front)
{
    std::vector<int> c;
    std::vector<double> l;
    for (const auto& e : front.entries()) {
        c.push_back(e.complexity);
        l.push_back(e.loss);
    }
    return front_scores(c, l);
}

// Index of the highest-scoring entry; ties go to the lower complexity.
inline std::size_t select_best(std::span<const int> complexities, std::span<const double> losses)
{
    const auto scores = front_scores(complexities, losses);
    std::size_t best = 0;
    for (std::size_t j = 1; j < scores.size(); ++j) {
        if (scores[j] > scores[best]) best = j;
    }
    return best;
}

inline std::size_t select_best(const ParetoFront& front)
{
    const auto scores = front_scores(front);
    std::size_t best = 0;
    for (std::size_t j = 1; j < scores.size(); ++j) {
        if (scores[j] > scores[best]) best = j;
    }
    return best;
}

} // namespace symdistill
