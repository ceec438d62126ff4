#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"

namespace symdistill {

enum class LossKind { MSE, MAE };

// A regression target: inputs in column layout, one target column and
// optional per-row weights. Shared read-only between populations.
class Problem {
public:
    Problem(ColumnData x, std::vector<double> y, std::vector<double> weights = {}, LossKind kind = LossKind::MSE)
        : x_(std::move(x))
        , y_(std::move(y))
        , weights_(std::move(weights))
        , kind_(kind)
    {
        if (y_.empty()) {
            throw StructuralError("empty dataset");
        }
        if (x_.rows() != y_.size()) {
            throw StructuralError("input has " + std::to_string(x_.rows()) + " rows but target has "
                + std::to_string(y_.size()));
        }
        for (std::size_t i = 0; i < y_.size(); ++i) {
            if (!std::isfinite(y_[i])) {
                throw StructuralError("non-finite target at row " + std::to_string(i));
            }
        }
        if (!weights_.empty()) {
            normalize_weights();
        }
        baseline_ = constant_baseline();
    }

    Problem(const Matrix& x, std::vector<double> y, std::vector<double> weights = {}, LossKind kind = LossKind::MSE)
        : Problem(ColumnData(x), std::move(y), std::move(weights), kind)
    {
    }

    [[nodiscard]] const ColumnData& x() const noexcept { return x_; }
    [[nodiscard]] const std::vector<double>& y() const noexcept { return y_; }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
    [[nodiscard]] bool weighted() const noexcept { return !weights_.empty(); }
    [[nodiscard]] LossKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t rows() const noexcept { return y_.size(); }

    // The same problem restricted to the given rows, in that order.
    [[nodiscard]] Problem subset(std::span<const std::size_t> rows) const
    {
        std::vector<std::vector<double>> cols(x_.cols(), std::vector<double>(rows.size()));
        std::vector<double> y(rows.size());
        std::vector<double> w(weights_.empty() ? 0 : rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            for (std::size_t c = 0; c < cols.size(); ++c) cols[c][k] = x_.column(c)[rows[k]];
            y[k] = y_[rows[k]];
            if (!w.empty()) w[k] = weights_[rows[k]];
        }
        return Problem(ColumnData(std::move(cols), rows.size()), std::move(y), std::move(w), kind_);
    }

    // Loss of the best constant predictor (the weighted mean for MSE).
    [[nodiscard]] double baseline() const noexcept { return baseline_; }

    // Mean (or weighted mean) of the pointwise loss; +inf when any prediction is NaN.
    [[nodiscard]] double loss_of(std::span<const double> pred) const noexcept
    {
        double acc = 0.0;
        const bool sq = kind_ == LossKind::MSE;
        if (weights_.empty()) {
            for (std::size_t i = 0; i < pred.size(); ++i) {
                const double r = pred[i] - y_[i];
                acc += sq ? r * r : std::abs(r);
            }
            acc /= static_cast<double>(pred.size());
        } else {
            for (std::size_t i = 0; i < pred.size(); ++i) {
                const double r = pred[i] - y_[i];
                acc += weights_[i] * (sq ? r * r : std::abs(r));
            }
            acc /= weight_sum_;
        }
        return std::isnan(acc) ? std::numeric_limits<double>::infinity() : acc;
    }

private:
    // Rows with equal weights reduce to the unweighted loss exactly; otherwise
    // weights are scaled by their maximum.
    void normalize_weights()
    {
        if (weights_.size() != y_.size()) {
            throw StructuralError("weights have " + std::to_string(weights_.size()) + " entries for "
                + std::to_string(y_.size()) + " rows");
        }
        double max_w = 0.0;
        for (double w : weights_) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw StructuralError("weights must be finite and nonnegative");
            max_w = std::max(max_w, w);
        }
        if (max_w <= 0.0) {
            throw StructuralError("all weights are zero");
        }
        const bool uniform = std::all_of(weights_.begin(), weights_.end(), [&](double w) { return w == max_w; });
        if (uniform) {
            weights_.clear();
            return;
        }
        weight_sum_ = 0.0;
        for (double& w : weights_) {
            w /= max_w;
            weight_sum_ += w;
        }
    }

    [[nodiscard]] double constant_baseline() const
    {
        double mean = 0.0;
        if (weights_.empty()) {
            for (double v : y_) mean += v;
            mean /= static_cast<double>(y_.size());
        } else {
            for (std::size_t i = 0; i < y_.size(); ++i) mean += weights_[i] * y_[i];
            mean /= weight_sum_;
        }
        std::vector<double> pred(y_.size(), mean);
        return loss_of(pred);
    }

    ColumnData x_;
    std::vector<double> y_;
    std::vector<double> weights_;
    double weight_sum_ = 0.0;
    LossKind kind_;
    double baseline_ = 0.0;
};

// Per-thread evaluation front end: owns the scratch buffers, shares the problem.
class LossFunction {
public:
    explicit LossFunction(std::shared_ptr<const Problem> problem)
        : problem_(std::move(problem))
        , pred_(problem_->rows())
    {
    }

    [[nodiscard]] const Problem& problem() const noexcept { return *problem_; }

    double operator()(const Expression& expr)
    {
        ++evaluations_;
        evaluator_.evaluate(expr, problem_->x(), pred_);
        return problem_->loss_of(pred_);
    }

    [[nodiscard]] std::uint64_t evaluations() const noexcept { return evaluations_; }

private:
    std::shared_ptr<const Problem> problem_;
    Evaluator evaluator_;
    std::vector<double> pred_;
    std::uint64_t evaluations_ = 0;
};

// Data loss plus parsimony times complexity; +inf when any prediction is NaN.
inline double penalized_loss(const Expression& expr, const Matrix& x, std::span<const double> y, double parsimony,
    const OperatorSet& ops = OperatorSet::all(), LossKind kind = LossKind::MSE)
{
    if (x.rows() == 0 || y.empty()) {
        throw StructuralError("empty dataset");
    }
    if (x.rows() != y.size()) {
        throw StructuralError("input has " + std::to_string(x.rows()) + " rows but target has "
            + std::to_string(y.size()));
    }
    const auto pred = eval_batch(expr, x);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double r = pred[i] - y[i];
        acc += kind == LossKind::MSE ? r * r : std::abs(r);
    }
    acc /= static_cast<double>(pred.size());
    if (std::isnan(acc)) return std::numeric_limits<double>::infinity();
    return acc + parsimony * static_cast<double>(complexity(expr, ops));
}

} // namespace symdistill
