#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "symdistill/pca.hpp"
#include "symdistill/rng.hpp"
#include "test_util.hpp"

using namespace symdistill;

namespace {

Matrix correlated_data(std::size_t n, std::size_t d, std::uint64_t seed)
{
    Rng rng(seed);
    Matrix m(n, d);
    // Correlated columns so the spectrum is not flat.
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            acc = 0.6 * acc + rng.normal() * static_cast<double>(d - c);
            m(i, c) = acc + 1.5;
        }
    }
    return m;
}

double mean_sq_diff(const Matrix& a, const Matrix& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        const double e = a.values()[i] - b.values()[i];
        s += e * e;
    }
    return s / static_cast<double>(a.values().size());
}

} // namespace

TEST(PCA, RankOneLine)
{
    Matrix m(50, 2);
    for (std::size_t i = 0; i < 50; ++i) {
        m(i, 0) = static_cast<double>(i) * 0.1 - 2.0;
        m(i, 1) = 2.0 * m(i, 0);
    }
    const auto model = pca_fit(m, 1);
    EXPECT_NEAR(model.components(0, 0), 1.0 / std::sqrt(5.0), 1e-12);
    EXPECT_NEAR(model.components(0, 1), 2.0 / std::sqrt(5.0), 1e-12);
    EXPECT_NEAR(explained_variance_ratio(model)[0], 1.0, 1e-12);
}

TEST(PCA, FullRankRoundTrip)
{
    const auto x = correlated_data(200, 5, 1);
    const auto model = pca_fit(x, 5);
    const auto back = reconstruct(model, project(model, x));
    double norm = 0.0;
    for (double v : x.values()) norm = std::max(norm, std::abs(v));
    for (std::size_t i = 0; i < x.values().size(); ++i) EXPECT_NEAR(back.values()[i], x.values()[i], 1e-8 * norm);
    const auto r = explained_variance_ratio(model);
    EXPECT_NEAR(std::accumulate(r.begin(), r.end(), 0.0), 1.0, 1e-12);
}

TEST(PCA, IsotropicRatios)
{
    Rng rng(2);
    Matrix x(10000, 4);
    for (auto& v : x.values()) v = rng.normal();
    for (double r : explained_variance_ratio(pca_fit(x, 4))) EXPECT_NEAR(r, 0.25, 0.05);
}

TEST(PCA, AxisVariances)
{
    // Centered, mutually orthogonal columns with sample variances 4, 1 and 0.
    const double c = std::sqrt(1.5);
    const Matrix x = Matrix::from_rows({{-3.0, 0.0, 7.0}, {1.0, 0.0, 7.0}, {1.0, c, 7.0}, {1.0, -c, 7.0}});
    const auto model = pca_fit(x, 2);
    const auto r = explained_variance_ratio(model);
    EXPECT_NEAR(r[0], 0.8, 1e-10);
    EXPECT_NEAR(r[1], 0.2, 1e-10);
    EXPECT_NEAR(model.explained_variance[0], 4.0, 1e-10);
}

TEST(PCA, MatchesCovarianceEigendecomposition)
{
    const auto x = correlated_data(300, 4, 3);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < x.rows(); ++i) rows.emplace_back(x.row(i).begin(), x.row(i).end());
    const auto eig = oracle::jacobi_eigen(oracle::covariance(rows));
    const auto model = pca_fit(x, 4);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_NEAR(model.explained_variance[k], eig.values[k], 1e-9 * eig.values[0]);
        double dot = 0.0;
        for (std::size_t j = 0; j < 4; ++j) dot += model.components(k, j) * eig.vectors[k][j];
        EXPECT_NEAR(std::abs(dot), 1.0, 1e-8);
    }
}

TEST(PCA, ReconstructionErrorIsDiscardedVariance)
{
    const auto x = correlated_data(400, 6, 4);
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n; ++i) rows.emplace_back(x.row(i).begin(), x.row(i).end());
    const auto eig = oracle::jacobi_eigen(oracle::covariance(rows));
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= d; ++k) {
        const auto model = pca_fit(x, k);
        const double err = mean_sq_diff(reconstruct(model, project(model, x)), x);
        double discarded = 0.0;
        for (std::size_t j = k; j < d; ++j) discarded += eig.values[j];
        const double expected = discarded * static_cast<double>(n - 1) / static_cast<double>(n * d);
        if (k < d) {
            EXPECT_NEAR(err, expected, 1e-6 * expected);
        }
        EXPECT_LE(err, prev + 1e-15);
        prev = err;
    }
}

TEST(PCA, OrthonormalSortedAndSignConvention)
{
    const auto model = pca_fit(correlated_data(100, 5, 5), 3);
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) {
            double dot = 0.0;
            for (std::size_t j = 0; j < 5; ++j) dot += model.components(a, j) * model.components(b, j);
            EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-8);
        }
        double big = 0.0;
        for (std::size_t j = 0; j < 5; ++j) {
            if (std::abs(model.components(a, j)) > std::abs(big)) big = model.components(a, j);
        }
        EXPECT_GT(big, 0.0);
    }
    const auto r = explained_variance_ratio(model);
    for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LE(r[i], r[i - 1]);
}

TEST(PCA, ProjectionIdentities)
{
    const auto x = correlated_data(80, 4, 6);
    const auto model = pca_fit(x, 2);
    const auto mean_row = Matrix(1, 4, model.mean);
    const auto at_mean = project(model, mean_row);
    for (double v : at_mean.values()) EXPECT_NEAR(v, 0.0, 1e-12);
    const auto z = Matrix::from_rows({{1.5, -0.25}, {0.0, 3.0}});
    const auto back = project(model, reconstruct(model, z));
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(back.values()[i], z.values()[i], 1e-10);
}

TEST(PCA, DeterministicAndPersistent)
{
    TempDir dir;
    const auto x = correlated_data(120, 5, 7);
    const auto a = pca_fit(x, 3);
    const auto b = pca_fit(x, 3);
    EXPECT_TRUE(a == b);
    save_pca(a, dir.path() / "pca");
    EXPECT_TRUE(load_pca(dir.path() / "pca") == a);
}

TEST(PCA, Errors)
{
    const auto x = correlated_data(10, 3, 8);
    EXPECT_THROW((void)pca_fit(x, 0), StructuralError);
    EXPECT_THROW((void)pca_fit(x, 4), StructuralError);
    EXPECT_THROW((void)pca_fit(Matrix::from_rows({{1.0, 2.0}}), 1), StructuralError);
    auto bad = x;
    bad(2, 1) = std::nan("");
    EXPECT_THROW((void)pca_fit(bad, 2), DataError);
    Matrix flat(5, 2, std::vector<double>(10, 1.0));
    EXPECT_THROW((void)explained_variance_ratio(pca_fit(flat, 1)), StructuralError);
    const auto model = pca_fit(x, 2);
    EXPECT_THROW((void)project(model, Matrix(2, 4)), StructuralError);
}
