#pragma once

#include <variant>
#include <vector>

#include "cn/matrix.hpp"
#include "cn/rng.hpp"

namespace cn {

// Pointer pair handed to the optimizer; gradients always have the shape of
// their parameter.
struct ParamRef {
    Matrix* value;
    Matrix* grad;
};

// Fully connected layer, y = x W^T + b. Weights are [out x in], bias [1 x out].
struct DenseLayer {
    Matrix weights;
    Matrix bias;
    Matrix grad_weights;
    Matrix grad_bias;
    Matrix input_cache;
    bool has_cache = false;

    DenseLayer(int in_dim, int out_dim);

    int in_dim() const { return weights.cols; }
    int out_dim() const { return weights.rows; }

    // Glorot uniform weights, zero bias. Draw order: weights row-major.
    void init(Rng& rng);

    Matrix forward(const Matrix& x);
    // Accumulates grad_weights/grad_bias for a sum-reduced upstream loss and
    // returns dX. Requires a preceding forward on the same batch.
    Matrix backward(const Matrix& d_out);

    void zero_grads();
    void collect_params(std::vector<ParamRef>& out);
};

// Per-column batch normalization with learned scale/shift and running
// statistics for inference. Normalizes by the population (1/B) variance.
struct BatchNormLayer {
    Matrix gamma;
    Matrix beta;
    Matrix grad_gamma;
    Matrix grad_beta;
    Matrix running_mean;
    Matrix running_var;
    double epsilon;
    double momentum;

    Matrix x_hat_cache;
    Matrix inv_std_cache;
    bool has_cache = false;
    bool cache_was_training = false;

    explicit BatchNormLayer(int dim, double eps = 1e-5, double mom = 0.1);

    int dim() const { return gamma.cols; }

    // Training mode uses batch statistics (requires B >= 2) and, when
    // update_running is set, folds them into the running stats with
    // exponential moving average. Inference mode uses running stats and
    // accepts B = 1.
    Matrix forward(const Matrix& x, bool training, bool update_running = true);
    Matrix backward(const Matrix& d_out);

    void zero_grads();
    void collect_params(std::vector<ParamRef>& out);
};

struct LeakyReluLayer {
    double slope;
    Matrix input_cache;
    bool has_cache = false;

    explicit LeakyReluLayer(double slope_ = 0.01);

    Matrix forward(const Matrix& x);
    Matrix backward(const Matrix& d_out);
};

using Block = std::variant<DenseLayer, BatchNormLayer, LeakyReluLayer>;

// A straight-line stack of blocks. forward/backward run them in order; all
// parameter gradients are accumulated in the blocks themselves.
struct Mlp {
    std::vector<Block> blocks;

    void init(Rng& rng);
    Matrix forward(const Matrix& x, bool training, bool update_running = true);
    Matrix backward(const Matrix& d_out);
    void zero_grads();
    std::vector<ParamRef> params();
    int param_count();
};

}  // namespace cn
