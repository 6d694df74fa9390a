#pragma once

#include "cn/matrix.hpp"

namespace cn {

struct PcaResult {
    Matrix components;  // 2 x d, orthonormal rows
    Matrix coords;      // n x 2 projection of the centered input
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double explained_fraction = 0.0;  // (lambda1 + lambda2) / total variance
};

// Top two principal components of the row-sample matrix x (n x d, n >= 3,
// d >= 2), via power iteration with deflation on the covariance. Sign
// convention: the largest-magnitude entry of each component is positive.
// Zero-variance input is an error; a rank-1 input gets a deterministic
// orthogonal second component with lambda2 = 0.
PcaResult pca_top2(const Matrix& x);

}  // namespace cn
