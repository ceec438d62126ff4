#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "matrix.hpp"
#include "table.hpp"

namespace symdistill {

// Centered, unwhitened PCA: rows of `components` are orthonormal directions
// in descending order of explained variance.
struct PCAModel {
    std::vector<double> mean;
    Matrix components; // k x d
    std::vector<double> explained_variance;
    double total_variance = 0.0;

    [[nodiscard]] std::size_t k() const noexcept { return components.rows(); }
    [[nodiscard]] std::size_t d() const noexcept { return mean.size(); }

    friend bool operator==(const PCAModel&, const PCAModel&) = default;
};

namespace detail {

inline Eigen::MatrixXd to_eigen(const Matrix& m)
{
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
    }
    return out;
}

inline Matrix from_eigen(const Eigen::MatrixXd& m)
{
    Matrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = m(r, c);
    }
    return out;
}

} // namespace detail

inline PCAModel pca_fit(const Matrix& x, std::size_t k)
{
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n < 2) throw StructuralError("PCA needs at least 2 rows, got " + std::to_string(n));
    if (k < 1 || k > std::min(n - 1, d)) {
        throw StructuralError("k = " + std::to_string(k) + " outside [1, " + std::to_string(std::min(n - 1, d)) + "]");
    }
    for (double v : x.values()) {
        if (!std::isfinite(v)) throw DataError("non-finite value in PCA input");
    }

    Eigen::MatrixXd a = detail::to_eigen(x);
    const Eigen::RowVectorXd mu = a.colwise().mean();
    a.rowwise() -= mu;
    const double denom = static_cast<double>(n - 1);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    Eigen::MatrixXd v = svd.matrixV();

    PCAModel model;
    model.mean.assign(mu.data(), mu.data() + d);
    model.components = Matrix(k, d);
    for (std::size_t i = 0; i < k; ++i) {
        const auto col = v.col(static_cast<Eigen::Index>(i));
        Eigen::Index arg = 0;
        for (Eigen::Index j = 1; j < col.size(); ++j) {
            if (std::abs(col(j)) > std::abs(col(arg))) arg = j;
        }
        const double sign = col(arg) < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < d; ++j) model.components(i, j) = sign * col(static_cast<Eigen::Index>(j));
        const double sv = s(static_cast<Eigen::Index>(i));
        model.explained_variance.push_back(sv * sv / denom);
    }
    model.total_variance = a.squaredNorm() / denom;
    return model;
}

inline void check_width(const PCAModel& model, const Matrix& m, std::size_t expected, const char* what)
{
    if (m.cols() != expected) {
        throw StructuralError(std::string(what) + " has " + std::to_string(m.cols()) + " columns, model expects "
            + std::to_string(expected));
    }
    (void)model;
}

// (X - mean) * components^T.
inline Matrix project(const PCAModel& model, const Matrix& x)
{
    check_width(model, x, model.d(), "input");
    Matrix out(x.rows(), model.k());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t i = 0; i < model.k(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < model.d(); ++j) s += (x(r, j) - model.mean[j]) * model.components(i, j);
            out(r, i) = s;
        }
    }
    return out;
}

// Z * components + mean.
inline Matrix reconstruct(const PCAModel& model, const Matrix& z)
{
    check_width(model, z, model.k(), "component scores");
    Matrix out(z.rows(), model.d());
    for (std::size_t r = 0; r < z.rows(); ++r) {
        for (std::size_t j = 0; j < model.d(); ++j) {
            double s = model.mean[j];
            for (std::size_t i = 0; i < model.k(); ++i) s += z(r, i) * model.components(i, j);
            out(r, j) = s;
        }
    }
    return out;
}

inline std::vector<double> explained_variance_ratio(const PCAModel& model)
{
    if (!(model.total_variance > 0.0)) throw StructuralError("data has zero total variance");
    std::vector<double> out;
    for (double v : model.explained_variance) out.push_back(v / model.total_variance);
    return out;
}

inline void save_pca(const PCAModel& model, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json m;
    m["format_version"] = 1;
    m["kind"] = "pca";
    m["n_components"] = model.k();
    m["n_features"] = model.d();
    m["total_variance"] = model.total_variance;
    m["dtype"] = "f64le";
    m["layout"] = "row-major";
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
    out << m.dump(2) << "\n";
    out.close();
    detail::write_f64le(dir / "mean.bin", model.mean);
    detail::write_f64le(dir / "components.bin", model.components.values());
    detail::write_f64le(dir / "variance.bin", model.explained_variance);
}

inline PCAModel load_pca(const std::filesystem::path& dir)
{
    std::ifstream in(dir / "manifest.json");
    if (!in) throw DataError("no manifest.json in " + dir.string());
    PCAModel model;
    try {
        nlohmann::json m;
        in >> m;
        if (m.at("kind").get<std::string>() != "pca" || m.at("format_version").get<int>() != 1) {
            throw DataError(dir.string() + " does not hold a PCA model");
        }
        const auto k = m.at("n_components").get<std::size_t>();
        const auto d = m.at("n_features").get<std::size_t>();
        model.total_variance = m.at("total_variance").get<double>();
        model.mean = detail::read_f64le(dir / "mean.bin");
        model.explained_variance = detail::read_f64le(dir / "variance.bin");
        auto comps = detail::read_f64le(dir / "components.bin");
        if (model.mean.size() != d || model.explained_variance.size() != k || comps.size() != k * d) {
            throw DataError("PCA payload sizes do not match the manifest in " + dir.string());
        }
        model.components = Matrix(k, d, std::move(comps));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad PCA manifest in " + dir.string() + ": " + e.what());
    }
    return model;
}

} // namespace symdistill
