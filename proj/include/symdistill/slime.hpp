#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "config.hpp"
#include "distill.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "table.hpp"

namespace symdistill {

struct SlimeParams {
    std::vector<double> x_star;
    std::size_t neighbors = 1;
    std::size_t n_synthetic = 0;
    // Per-coordinate sampling variance; defaults to half the neighbors' sample variance.
    std::optional<std::vector<double>> sigma2;
    double neighbor_weight = 1.0;
    // Kernel bandwidth; defaults to the sampling variance, coordinate by coordinate.
    std::optional<double> kernel_sigma2;
};

// Maps one input row to one output row.
using BlackBox = std::function<std::vector<double>(std::span<const double>)>;

// Indices of the `count` rows nearest to `point`, ties broken by row index.
inline std::vector<std::size_t> nearest_rows(const Matrix& x, std::span<const double> point, std::size_t count)
{
    std::vector<double> dist(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) {
            const double d = x(r, c) - point[c];
            s += d * d;
        }
        dist[r] = s;
    }
    std::vector<std::size_t> order(x.rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    order.resize(count);
    return order;
}

// Locale around x_star: the J nearest recorded rows with weight M, then
// n_synthetic Gaussian samples labelled by `f` and weighted by the kernel.
inline IOTable build_locale(const IOTable& data, const SlimeParams& params, Rng& rng, const BlackBox& f = {})
{
    const std::size_t d = data.inputs();
    if (params.x_star.size() != d) {
        throw ConfigError("x_star has " + std::to_string(params.x_star.size()) + " coordinates, data has "
            + std::to_string(d) + " inputs");
    }
    if (params.neighbors < 1) throw ConfigError("neighbor count must be >= 1");
    if (params.neighbors > data.rows()) {
        throw StructuralError("asked for " + std::to_string(params.neighbors) + " neighbors but the data has "
            + std::to_string(data.rows()) + " rows");
    }
    if (params.n_synthetic > 0 && !f) {
        throw DataError("synthetic samples need a callable to label them");
    }
    if (!(params.neighbor_weight >= 0.0)) throw ConfigError("neighbor weight must be nonnegative");

    const auto idx = nearest_rows(data.x, params.x_star, params.neighbors);

    std::vector<double> sigma2;
    if (params.sigma2) {
        sigma2 = *params.sigma2;
        if (sigma2.size() == 1 && d > 1) sigma2.assign(d, sigma2.front());
        if (sigma2.size() != d) throw ConfigError("sigma2 must have one entry per input");
    } else {
        sigma2.assign(d, 0.0);
        if (idx.size() >= 2) {
            for (std::size_t c = 0; c < d; ++c) {
                double mean = 0.0;
                for (auto r : idx) mean += data.x(r, c);
                mean /= static_cast<double>(idx.size());
                double ss = 0.0;
                for (auto r : idx) ss += (data.x(r, c) - mean) * (data.x(r, c) - mean);
                sigma2[c] = 0.5 * ss / static_cast<double>(idx.size() - 1);
            }
        }
    }
    if (params.n_synthetic > 0) {
        for (double s : sigma2) {
            if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("sampling variance must be positive");
        }
        if (params.kernel_sigma2 && !(*params.kernel_sigma2 > 0.0)) throw ConfigError("kernel_sigma2 must be positive");
    }

    const std::size_t n = idx.size() + params.n_synthetic;
    IOTable out;
    out.input_names = data.input_names;
    out.output_names = data.output_names;
    out.x = Matrix(n, d);
    out.y = Matrix(n, data.outputs());
    out.weights.assign(n, params.neighbor_weight);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        for (std::size_t c = 0; c < d; ++c) out.x(k, c) = data.x(idx[k], c);
        for (std::size_t c = 0; c < data.outputs(); ++c) out.y(k, c) = data.y(idx[k], c);
    }
    std::vector<double> z(d);
    for (std::size_t s = 0; s < params.n_synthetic; ++s) {
        const std::size_t row = idx.size() + s;
        double dist = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            z[c] = rng.normal(params.x_star[c], std::sqrt(sigma2[c]));
            const double diff = params.x_star[c] - z[c];
            dist += diff * diff / (params.kernel_sigma2 ? *params.kernel_sigma2 : sigma2[c]);
        }
        const auto fz = f(z);
        if (fz.size() != data.outputs()) {
            throw DataError("callable returned " + std::to_string(fz.size()) + " outputs, expected "
                + std::to_string(data.outputs()));
        }
        for (std::size_t c = 0; c < d; ++c) out.x(row, c) = z[c];
        for (std::size_t c = 0; c < fz.size(); ++c) out.y(row, c) = fz[c];
        out.weights[row] = std::exp(-dist);
    }
    return out;
}

// Weighted fit of each output of a locale; same per-dimension seeding as distill.
inline FitResult slime_fit(const IOTable& locale, const SRConfig& config)
{
    if (locale.rows() == 0) throw StructuralError("empty locale");
    if (!locale.weights.empty()
        && std::all_of(locale.weights.begin(), locale.weights.end(), [](double w) { return w == 0.0; })) {
        throw StructuralError("all locale weights are zero");
    }
    return fit_table(locale, config);
}

} // namespace symdistill
