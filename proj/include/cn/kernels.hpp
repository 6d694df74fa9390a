#pragma once

#include "cn/matrix.hpp"

// Dense numeric kernels. The cn::kernels functions are OpenMP-parallel over
// independent output elements, so results are bitwise identical to the
// serial versions in cn::kernels::serial regardless of thread count. The
// serial versions are the reference implementation used by the parity tests
// and the kernel benchmark.
namespace cn::kernels {

// C = A * B            A: [m x k], B: [k x n]
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A * B^T          A: [m x k], B: [n x k]
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// C = A^T * B          A: [m x k], B: [m x n]
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// out[r] = row r of X plus v (v is 1 x cols)
void add_row_vector(Matrix& x, const Matrix& v);

// 1 x cols vector of column sums
Matrix col_sums(const Matrix& x);

// Population (1/N) column statistics; mean and var are 1 x cols.
void col_mean_var(const Matrix& x, Matrix& mean, Matrix& var);

// y = x >= 0 ? x : slope * x, elementwise
Matrix leaky_relu(const Matrix& x, double slope);
// dx = dy * (x >= 0 ? 1 : slope), elementwise
Matrix leaky_relu_grad(const Matrix& x, const Matrix& dy, double slope);

// Row-wise softmax with max-subtraction stabilization.
Matrix softmax_rows(const Matrix& logits);

// In-place Adam update on one parameter array. The caller owns the step
// count and passes the bias corrections (1 - beta^t) explicitly.
// grad_scale lets the caller flip the sign for a gradient-ascent step.
void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                 double lr, double beta1, double beta2, double eps,
                 double bias_corr1, double bias_corr2, double grad_scale = 1.0);

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
void add_row_vector(Matrix& x, const Matrix& v);
Matrix col_sums(const Matrix& x);
void col_mean_var(const Matrix& x, Matrix& mean, Matrix& var);
Matrix leaky_relu(const Matrix& x, double slope);
Matrix leaky_relu_grad(const Matrix& x, const Matrix& dy, double slope);
Matrix softmax_rows(const Matrix& logits);
void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                 double lr, double beta1, double beta2, double eps,
                 double bias_corr1, double bias_corr2, double grad_scale = 1.0);

}  // namespace serial

}  // namespace cn::kernels
