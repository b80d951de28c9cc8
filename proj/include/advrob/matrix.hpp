#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace advrob {

// Dense row-major matrix of doubles. Deliberately minimal: the numerics in
// this project are small enough that explicit loops beat a linear-algebra
// dependency, and fixed evaluation order keeps results bit-reproducible.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    bool empty() const { return rows == 0 || cols == 0; }

    std::vector<double> row_vector(std::size_t i) const {
        return std::vector<double>(row(i), row(i) + cols);
    }

    void set_row(std::size_t i, const std::vector<double>& v) {
        if (v.size() != cols) throw std::invalid_argument("set_row: width mismatch");
        for (std::size_t j = 0; j < cols; ++j) (*this)(i, j) = v[j];
    }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows_in) {
        if (rows_in.empty()) return {};
        Matrix m(rows_in.size(), rows_in.front().size());
        for (std::size_t i = 0; i < rows_in.size(); ++i) m.set_row(i, rows_in[i]);
        return m;
    }
};

}  // namespace advrob
