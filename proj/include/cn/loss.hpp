#pragma once

#include <vector>

#include "cn/matrix.hpp"

namespace cn {

struct SoftmaxCrossEntropy {
    double loss;      // mean over the batch of -log p[label]
    Matrix d_logits;  // (softmax - onehot) / B
    Matrix probs;
};

// Numerically stabilized softmax cross-entropy. labels[i] must be in
// [0, logits.cols).
SoftmaxCrossEntropy softmax_cross_entropy(const Matrix& logits,
                                          const std::vector<int>& labels);

}  // namespace cn
