#include "cn/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cn::kernels {

namespace {

// Below these element counts the parallel regions are not worth spawning.
constexpr long kMatmulWorkThreshold = 1 << 15;
constexpr long kElemwiseThreshold = 1 << 14;

void check_matmul(const Matrix& a, const Matrix& b, int a_inner, int b_inner,
                  const char* name) {
    if (a.empty() || b.empty())
        throw std::invalid_argument(std::string(name) + ": empty operand");
    if (a_inner != b_inner)
        throw std::invalid_argument(std::string(name) + ": inner dimensions " +
                                    std::to_string(a_inner) + " and " +
                                    std::to_string(b_inner) + " do not match");
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_matmul(a, b, a.cols, b.rows, "matmul");
    Matrix c(a.rows, b.cols);
    const long work = static_cast<long>(a.rows) * a.cols * b.cols;
#pragma omp parallel for if (work >= kMatmulWorkThreshold)
    for (int i = 0; i < a.rows; ++i) {
        for (int j = 0; j < b.cols; ++j) {
            double sum = 0.0;
            for (int k = 0; k < a.cols; ++k) sum += a(i, k) * b(k, j);
            c(i, j) = sum;
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    check_matmul(a, b, a.cols, b.cols, "matmul_nt");
    Matrix c(a.rows, b.rows);
    const long work = static_cast<long>(a.rows) * a.cols * b.rows;
#pragma omp parallel for if (work >= kMatmulWorkThreshold)
    for (int i = 0; i < a.rows; ++i) {
        for (int j = 0; j < b.rows; ++j) {
            double sum = 0.0;
            for (int k = 0; k < a.cols; ++k) sum += a(i, k) * b(j, k);
            c(i, j) = sum;
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    check_matmul(a, b, a.rows, b.rows, "matmul_tn");
    Matrix c(a.cols, b.cols);
    const long work = static_cast<long>(a.cols) * a.rows * b.cols;
#pragma omp parallel for if (work >= kMatmulWorkThreshold)
    for (int i = 0; i < a.cols; ++i) {
        for (int j = 0; j < b.cols; ++j) {
            double sum = 0.0;
            for (int k = 0; k < a.rows; ++k) sum += a(k, i) * b(k, j);
            c(i, j) = sum;
        }
    }
    return c;
}

void add_row_vector(Matrix& x, const Matrix& v) {
    if (v.rows != 1 || v.cols != x.cols)
        throw std::invalid_argument("add_row_vector: vector shape mismatch");
    const long work = static_cast<long>(x.rows) * x.cols;
#pragma omp parallel for if (work >= kElemwiseThreshold)
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) x(i, j) += v(0, j);
}

Matrix col_sums(const Matrix& x) {
    Matrix out(1, x.cols);
#pragma omp parallel for if (static_cast<long>(x.rows) * x.cols >= kElemwiseThreshold)
    for (int j = 0; j < x.cols; ++j) {
        double sum = 0.0;
        for (int i = 0; i < x.rows; ++i) sum += x(i, j);
        out(0, j) = sum;
    }
    return out;
}

void col_mean_var(const Matrix& x, Matrix& mean, Matrix& var) {
    if (x.rows < 1) throw std::invalid_argument("col_mean_var: empty input");
    mean = Matrix(1, x.cols);
    var = Matrix(1, x.cols);
    const double inv_n = 1.0 / x.rows;
#pragma omp parallel for if (static_cast<long>(x.rows) * x.cols >= kElemwiseThreshold)
    for (int j = 0; j < x.cols; ++j) {
        double sum = 0.0;
        for (int i = 0; i < x.rows; ++i) sum += x(i, j);
        const double mu = sum * inv_n;
        double sq = 0.0;
        for (int i = 0; i < x.rows; ++i) {
            const double d = x(i, j) - mu;
            sq += d * d;
        }
        mean(0, j) = mu;
        var(0, j) = sq * inv_n;
    }
}

Matrix leaky_relu(const Matrix& x, double slope) {
    Matrix y(x.rows, x.cols);
    const long n = static_cast<long>(x.data.size());
#pragma omp parallel for if (n >= kElemwiseThreshold)
    for (long i = 0; i < n; ++i) {
        const double v = x.data[i];
        y.data[i] = v >= 0.0 ? v : slope * v;
    }
    return y;
}

Matrix leaky_relu_grad(const Matrix& x, const Matrix& dy, double slope) {
    if (!x.same_shape(dy))
        throw std::invalid_argument("leaky_relu_grad: shape mismatch");
    Matrix dx(x.rows, x.cols);
    const long n = static_cast<long>(x.data.size());
#pragma omp parallel for if (n >= kElemwiseThreshold)
    for (long i = 0; i < n; ++i)
        dx.data[i] = x.data[i] >= 0.0 ? dy.data[i] : slope * dy.data[i];
    return dx;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix p(logits.rows, logits.cols);
#pragma omp parallel for if (static_cast<long>(logits.rows) * logits.cols >= kElemwiseThreshold)
    for (int i = 0; i < logits.rows; ++i) {
        double mx = logits(i, 0);
        for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, logits(i, j));
        double denom = 0.0;
        for (int j = 0; j < logits.cols; ++j) {
            const double e = std::exp(logits(i, j) - mx);
            p(i, j) = e;
            denom += e;
        }
        for (int j = 0; j < logits.cols; ++j) p(i, j) /= denom;
    }
    return p;
}

void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                 double lr, double beta1, double beta2, double eps,
                 double bias_corr1, double bias_corr2, double grad_scale) {
    if (!param.same_shape(grad) || !param.same_shape(m) || !param.same_shape(v))
        throw std::invalid_argument("adam_update: shape mismatch");
    const long n = static_cast<long>(param.data.size());
#pragma omp parallel for if (n >= kElemwiseThreshold)
    for (long i = 0; i < n; ++i) {
        const double g = grad.data[i] * grad_scale;
        m.data[i] = beta1 * m.data[i] + (1.0 - beta1) * g;
        v.data[i] = beta2 * v.data[i] + (1.0 - beta2) * g * g;
        const double m_hat = m.data[i] / bias_corr1;
        const double v_hat = v.data[i] / bias_corr2;
        param.data[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_matmul(a, b, a.cols, b.rows, "matmul");
    Matrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < b.cols; ++j) {
            double sum = 0.0;
            for (int k = 0; k < a.cols; ++k) sum += a(i, k) * b(k, j);
            c(i, j) = sum;
        }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    check_matmul(a, b, a.cols, b.cols, "matmul_nt");
    Matrix c(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < b.rows; ++j) {
            double sum = 0.0;
            for (int k = 0; k < a.cols; ++k) sum += a(i, k) * b(j, k);
            c(i, j) = sum;
        }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    check_matmul(a, b, a.rows, b.rows, "matmul_tn");
    Matrix c(a.cols, b.cols);
    for (int i = 0; i < a.cols; ++i)
        for (int j = 0; j < b.cols; ++j) {
            double sum = 0.0;
            for (int k = 0; k < a.rows; ++k) sum += a(k, i) * b(k, j);
            c(i, j) = sum;
        }
    return c;
}

void add_row_vector(Matrix& x, const Matrix& v) {
    if (v.rows != 1 || v.cols != x.cols)
        throw std::invalid_argument("add_row_vector: vector shape mismatch");
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) x(i, j) += v(0, j);
}

Matrix col_sums(const Matrix& x) {
    Matrix out(1, x.cols);
    for (int j = 0; j < x.cols; ++j) {
        double sum = 0.0;
        for (int i = 0; i < x.rows; ++i) sum += x(i, j);
        out(0, j) = sum;
    }
    return out;
}

void col_mean_var(const Matrix& x, Matrix& mean, Matrix& var) {
    if (x.rows < 1) throw std::invalid_argument("col_mean_var: empty input");
    mean = Matrix(1, x.cols);
    var = Matrix(1, x.cols);
    const double inv_n = 1.0 / x.rows;
    for (int j = 0; j < x.cols; ++j) {
        double sum = 0.0;
        for (int i = 0; i < x.rows; ++i) sum += x(i, j);
        const double mu = sum * inv_n;
        double sq = 0.0;
        for (int i = 0; i < x.rows; ++i) {
            const double d = x(i, j) - mu;
            sq += d * d;
        }
        mean(0, j) = mu;
        var(0, j) = sq * inv_n;
    }
}

Matrix leaky_relu(const Matrix& x, double slope) {
    Matrix y(x.rows, x.cols);
    for (size_t i = 0; i < x.data.size(); ++i) {
        const double v = x.data[i];
        y.data[i] = v >= 0.0 ? v : slope * v;
    }
    return y;
}

Matrix leaky_relu_grad(const Matrix& x, const Matrix& dy, double slope) {
    if (!x.same_shape(dy))
        throw std::invalid_argument("leaky_relu_grad: shape mismatch");
    Matrix dx(x.rows, x.cols);
    for (size_t i = 0; i < x.data.size(); ++i)
        dx.data[i] = x.data[i] >= 0.0 ? dy.data[i] : slope * dy.data[i];
    return dx;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix p(logits.rows, logits.cols);
    for (int i = 0; i < logits.rows; ++i) {
        double mx = logits(i, 0);
        for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, logits(i, j));
        double denom = 0.0;
        for (int j = 0; j < logits.cols; ++j) {
            const double e = std::exp(logits(i, j) - mx);
            p(i, j) = e;
            denom += e;
        }
        for (int j = 0; j < logits.cols; ++j) p(i, j) /= denom;
    }
    return p;
}

void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                 double lr, double beta1, double beta2, double eps,
                 double bias_corr1, double bias_corr2, double grad_scale) {
    if (!param.same_shape(grad) || !param.same_shape(m) || !param.same_shape(v))
        throw std::invalid_argument("adam_update: shape mismatch");
    for (size_t i = 0; i < param.data.size(); ++i) {
        const double g = grad.data[i] * grad_scale;
        m.data[i] = beta1 * m.data[i] + (1.0 - beta1) * g;
        v.data[i] = beta2 * v.data[i] + (1.0 - beta2) * g * g;
        const double m_hat = m.data[i] / bias_corr1;
        const double v_hat = v.data[i] / bias_corr2;
        param.data[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

}  // namespace serial

}  // namespace cn::kernels
