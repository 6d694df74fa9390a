#include "cn/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "cn/kernels.hpp"

namespace cn {

DenseLayer::DenseLayer(int in_dim, int out_dim)
    : weights(out_dim, in_dim),
      bias(1, out_dim),
      grad_weights(out_dim, in_dim),
      grad_bias(1, out_dim) {
    require(in_dim >= 1 && out_dim >= 1, "DenseLayer: dimensions must be >= 1");
}

void DenseLayer::init(Rng& rng) {
    const double limit = std::sqrt(6.0 / (in_dim() + out_dim()));
    for (double& w : weights.data) w = rng.uniform(-limit, limit);
    bias.fill(0.0);
    zero_grads();
    has_cache = false;
}

Matrix DenseLayer::forward(const Matrix& x) {
    require_cols(x, in_dim(), "dense forward");
    input_cache = x;
    has_cache = true;
    Matrix y = kernels::matmul_nt(x, weights);
    kernels::add_row_vector(y, bias);
    return y;
}

Matrix DenseLayer::backward(const Matrix& d_out) {
    if (!has_cache) throw std::logic_error("dense backward: no cached forward");
    require_cols(d_out, out_dim(), "dense backward");
    if (d_out.rows != input_cache.rows)
        throw std::invalid_argument("dense backward: batch size does not match forward");
    Matrix dw = kernels::matmul_tn(d_out, input_cache);
    for (size_t i = 0; i < dw.data.size(); ++i) grad_weights.data[i] += dw.data[i];
    Matrix db = kernels::col_sums(d_out);
    for (size_t i = 0; i < db.data.size(); ++i) grad_bias.data[i] += db.data[i];
    return kernels::matmul(d_out, weights);
}

void DenseLayer::zero_grads() {
    grad_weights.fill(0.0);
    grad_bias.fill(0.0);
}

void DenseLayer::collect_params(std::vector<ParamRef>& out) {
    out.push_back({&weights, &grad_weights});
    out.push_back({&bias, &grad_bias});
}

BatchNormLayer::BatchNormLayer(int dim, double eps, double mom)
    : gamma(1, dim, 1.0),
      beta(1, dim),
      grad_gamma(1, dim),
      grad_beta(1, dim),
      running_mean(1, dim),
      running_var(1, dim, 1.0),
      epsilon(eps),
      momentum(mom) {
    require(dim >= 1, "BatchNormLayer: dim must be >= 1");
    require(eps > 0.0, "BatchNormLayer: epsilon must be positive");
    require(mom > 0.0 && mom < 1.0, "BatchNormLayer: momentum must be in (0,1)");
}

Matrix BatchNormLayer::forward(const Matrix& x, bool training, bool update_running) {
    require_cols(x, dim(), "batchnorm forward");
    Matrix mean, var;
    if (training) {
        if (x.rows < 2)
            throw std::invalid_argument(
                "batchnorm forward: training mode needs a batch of at least 2");
        kernels::col_mean_var(x, mean, var);
        if (update_running) {
            for (int j = 0; j < dim(); ++j) {
                running_mean(0, j) =
                    (1.0 - momentum) * running_mean(0, j) + momentum * mean(0, j);
                running_var(0, j) =
                    (1.0 - momentum) * running_var(0, j) + momentum * var(0, j);
            }
        }
    } else {
        mean = running_mean;
        var = running_var;
    }

    inv_std_cache = Matrix(1, dim());
    for (int j = 0; j < dim(); ++j)
        inv_std_cache(0, j) = 1.0 / std::sqrt(var(0, j) + epsilon);

    Matrix y(x.rows, x.cols);
    x_hat_cache = Matrix(x.rows, x.cols);
    for (int i = 0; i < x.rows; ++i) {
        for (int j = 0; j < x.cols; ++j) {
            const double xh = (x(i, j) - mean(0, j)) * inv_std_cache(0, j);
            x_hat_cache(i, j) = xh;
            y(i, j) = gamma(0, j) * xh + beta(0, j);
        }
    }
    has_cache = true;
    cache_was_training = training;
    return y;
}

Matrix BatchNormLayer::backward(const Matrix& d_out) {
    if (!has_cache) throw std::logic_error("batchnorm backward: no cached forward");
    if (!d_out.same_shape(x_hat_cache))
        throw std::invalid_argument("batchnorm backward: shape does not match forward");

    const int b = d_out.rows;
    const int d = d_out.cols;
    Matrix dx(b, d);
    for (int j = 0; j < d; ++j) {
        double sum_dy = 0.0;
        double sum_dy_xhat = 0.0;
        for (int i = 0; i < b; ++i) {
            sum_dy += d_out(i, j);
            sum_dy_xhat += d_out(i, j) * x_hat_cache(i, j);
        }
        grad_gamma(0, j) += sum_dy_xhat;
        grad_beta(0, j) += sum_dy;

        const double g = gamma(0, j);
        const double inv_std = inv_std_cache(0, j);
        if (cache_was_training) {
            // Batch statistics couple the samples within a column.
            for (int i = 0; i < b; ++i) {
                dx(i, j) = g * inv_std / b *
                           (b * d_out(i, j) - sum_dy - x_hat_cache(i, j) * sum_dy_xhat);
            }
        } else {
            for (int i = 0; i < b; ++i) dx(i, j) = g * inv_std * d_out(i, j);
        }
    }
    return dx;
}

void BatchNormLayer::zero_grads() {
    grad_gamma.fill(0.0);
    grad_beta.fill(0.0);
}

void BatchNormLayer::collect_params(std::vector<ParamRef>& out) {
    out.push_back({&gamma, &grad_gamma});
    out.push_back({&beta, &grad_beta});
}

LeakyReluLayer::LeakyReluLayer(double slope_) : slope(slope_) {
    require(slope > 0.0 && slope < 1.0, "LeakyReluLayer: slope must be in (0,1)");
}

Matrix LeakyReluLayer::forward(const Matrix& x) {
    input_cache = x;
    has_cache = true;
    return kernels::leaky_relu(x, slope);
}

Matrix LeakyReluLayer::backward(const Matrix& d_out) {
    if (!has_cache) throw std::logic_error("leaky_relu backward: no cached forward");
    return kernels::leaky_relu_grad(input_cache, d_out, slope);
}

void Mlp::init(Rng& rng) {
    for (Block& blk : blocks)
        if (auto* dense = std::get_if<DenseLayer>(&blk)) dense->init(rng);
}

Matrix Mlp::forward(const Matrix& x, bool training, bool update_running) {
    Matrix h = x;
    for (Block& blk : blocks) {
        h = std::visit(
            [&](auto& layer) -> Matrix {
                using T = std::decay_t<decltype(layer)>;
                if constexpr (std::is_same_v<T, BatchNormLayer>)
                    return layer.forward(h, training, update_running);
                else
                    return layer.forward(h);
            },
            blk);
    }
    return h;
}

Matrix Mlp::backward(const Matrix& d_out) {
    Matrix d = d_out;
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it)
        d = std::visit([&](auto& layer) { return layer.backward(d); }, *it);
    return d;
}

void Mlp::zero_grads() {
    for (Block& blk : blocks)
        std::visit(
            [](auto& layer) {
                using T = std::decay_t<decltype(layer)>;
                if constexpr (!std::is_same_v<T, LeakyReluLayer>) layer.zero_grads();
            },
            blk);
}

std::vector<ParamRef> Mlp::params() {
    std::vector<ParamRef> out;
    for (Block& blk : blocks)
        std::visit(
            [&](auto& layer) {
                using T = std::decay_t<decltype(layer)>;
                if constexpr (!std::is_same_v<T, LeakyReluLayer>)
                    layer.collect_params(out);
            },
            blk);
    return out;
}

int Mlp::param_count() {
    int n = 0;
    for (const ParamRef& p : params()) n += static_cast<int>(p.value->size());
    return n;
}

}  // namespace cn
