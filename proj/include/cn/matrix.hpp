#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cn {

// Row-major dense matrix of 64-bit floats. A row is one sample.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;

    Matrix(int r, int c, double value = 0.0)
        : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), value) {
        if (r < 0 || c < 0) throw std::invalid_argument("Matrix: negative dimension");
    }

    double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    bool empty() const { return rows == 0 || cols == 0; }
    size_t size() const { return data.size(); }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    Matrix row(int r) const {
        Matrix out(1, cols);
        for (int c = 0; c < cols; ++c) out(0, c) = (*this)(r, c);
        return out;
    }
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_cols(const Matrix& m, int cols, const std::string& what) {
    if (m.cols != cols)
        throw std::invalid_argument(what + ": expected " + std::to_string(cols) +
                                    " columns, got " + std::to_string(m.cols));
}

}  // namespace cn
