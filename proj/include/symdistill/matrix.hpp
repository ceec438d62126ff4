#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace symdistill {

// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows)
        , cols_(cols)
        , data_(rows * cols, fill)
    {
    }

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows)
        , cols_(cols)
        , data_(std::move(data))
    {
        if (data_.size() != rows * cols) {
            throw StructuralError("matrix payload holds " + std::to_string(data_.size()) + " values, expected "
                + std::to_string(rows * cols));
        }
    }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows)
    {
        const std::size_t n = rows.size();
        const std::size_t d = n == 0 ? 0 : rows.front().size();
        Matrix m(n, d);
        for (std::size_t i = 0; i < n; ++i) {
            if (rows[i].size() != d) {
                throw StructuralError("ragged row " + std::to_string(i));
            }
            for (std::size_t j = 0; j < d; ++j) {
                m(i, j) = rows[i][j];
            }
        }
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept
    {
        return {data_.data() + r * cols_, cols_};
    }

    [[nodiscard]] std::vector<double> column(std::size_t c) const
    {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            out[r] = (*this)(r, c);
        }
        return out;
    }

    [[nodiscard]] const std::vector<double>& values() const noexcept { return data_; }
    [[nodiscard]] std::vector<double>& values() noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace symdistill
