#include "cn/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cn/kernels.hpp"

namespace cn {

SoftmaxCrossEntropy softmax_cross_entropy(const Matrix& logits,
                                          const std::vector<int>& labels) {
    if (logits.empty()) throw std::invalid_argument("softmax_cross_entropy: empty logits");
    if (static_cast<int>(labels.size()) != logits.rows)
        throw std::invalid_argument("softmax_cross_entropy: label count " +
                                    std::to_string(labels.size()) + " != batch size " +
                                    std::to_string(logits.rows));
    for (int i = 0; i < logits.rows; ++i)
        if (labels[i] < 0 || labels[i] >= logits.cols)
            throw std::invalid_argument("softmax_cross_entropy: label " +
                                        std::to_string(labels[i]) + " out of range [0," +
                                        std::to_string(logits.cols) + ") at row " +
                                        std::to_string(i));

    SoftmaxCrossEntropy out;
    out.probs = kernels::softmax_rows(logits);
    const int b = logits.rows;
    double loss = 0.0;
    for (int i = 0; i < b; ++i) {
        // softmax with max-subtraction keeps p[label] > 0 for finite logits,
        // but clamp anyway so a denormal cannot produce -inf
        const double p = std::max(out.probs(i, labels[i]), 1e-300);
        loss -= std::log(p);
    }
    out.loss = loss / b;

    out.d_logits = out.probs;
    for (int i = 0; i < b; ++i) out.d_logits(i, labels[i]) -= 1.0;
    for (double& v : out.d_logits.data) v /= b;
    return out;
}

}  // namespace cn
