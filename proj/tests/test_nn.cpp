#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "cn/layers.hpp"
#include "cn/loss.hpp"
#include "cn/optim.hpp"
#include "gradcheck.hpp"

using namespace cn;
using testutil::random_matrix;

TEST_CASE("dense forward: identity weights pass the input through") {
    DenseLayer dense(2, 2);
    dense.weights(0, 0) = 1.0;
    dense.weights(1, 1) = 1.0;
    Matrix x(1, 2);
    x(0, 0) = 3.0;
    x(0, 1) = 4.0;
    Matrix y = dense.forward(x);
    CHECK(y(0, 0) == 3.0);
    CHECK(y(0, 1) == 4.0);
}

TEST_CASE("dense forward: scalar affine") {
    DenseLayer dense(1, 1);
    dense.weights(0, 0) = 2.0;
    dense.bias(0, 0) = 1.0;
    Matrix x(1, 1, 3.0);
    CHECK(dense.forward(x)(0, 0) == 7.0);
}

TEST_CASE("dense backward: zero upstream gives zero gradients") {
    Rng rng(5);
    DenseLayer dense(3, 2);
    dense.init(rng);
    Matrix x = random_matrix(4, 3, rng);
    dense.forward(x);
    Matrix dx = dense.backward(Matrix(4, 2, 0.0));
    for (double v : dense.grad_weights.data) CHECK(v == 0.0);
    for (double v : dense.grad_bias.data) CHECK(v == 0.0);
    for (double v : dx.data) CHECK(v == 0.0);
}

TEST_CASE("dense backward before forward is a state error") {
    DenseLayer dense(2, 2);
    CHECK_THROWS_AS(dense.backward(Matrix(1, 2, 1.0)), std::logic_error);
}

TEST_CASE("dense init stays inside the fan-scaled uniform bound") {
    Rng rng(6);
    DenseLayer dense(30, 20);
    dense.init(rng);
    double bound = std::sqrt(6.0 / (30 + 20));
    for (double v : dense.weights.data) {
        CHECK(v <= bound);
        CHECK(v >= -bound);
    }
    for (double v : dense.bias.data) CHECK(v == 0.0);
}

TEST_CASE("leaky relu values at the definition points") {
    LeakyReluLayer relu(0.01);
    Matrix x(1, 3);
    x(0, 0) = 1.0;
    x(0, 1) = -1.0;
    x(0, 2) = 0.0;
    Matrix y = relu.forward(x);
    CHECK(y(0, 0) == 1.0);
    CHECK(y(0, 1) == -0.01);
    CHECK(y(0, 2) == 0.0);
}

TEST_CASE("leaky relu rejects slopes outside (0,1)") {
    CHECK_THROWS_AS(LeakyReluLayer(0.0), std::invalid_argument);
    CHECK_THROWS_AS(LeakyReluLayer(1.0), std::invalid_argument);
    CHECK_THROWS_AS(LeakyReluLayer(-0.5), std::invalid_argument);
}

TEST_CASE("batchnorm: constant column collapses to zeros") {
    BatchNormLayer bn(1);
    Matrix x(4, 1, 3.5);
    Matrix y = bn.forward(x, true);
    for (double v : y.data) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("batchnorm: two-point column with beta=5") {
    BatchNormLayer bn(1);
    bn.beta(0, 0) = 5.0;
    Matrix x(2, 1);
    x(0, 0) = -1.0;
    x(1, 0) = 1.0;
    Matrix y = bn.forward(x, true);
    double unit = 1.0 / std::sqrt(1.0 + bn.epsilon);
    CHECK(y(0, 0) == doctest::Approx(5.0 - unit));
    CHECK(y(1, 0) == doctest::Approx(5.0 + unit));
}

TEST_CASE("batchnorm running statistics follow the EMA update") {
    BatchNormLayer bn(1, 1e-5, 0.1);
    Matrix x(2, 1);
    x(0, 0) = 4.0;
    x(1, 0) = 6.0;
    bn.forward(x, true);
    // batch mean 5, population variance 1; running stats start at 0 and 1
    CHECK(bn.running_mean(0, 0) == doctest::Approx(0.9 * 0.0 + 0.1 * 5.0));
    CHECK(bn.running_var(0, 0) == doctest::Approx(0.9 * 1.0 + 0.1 * 1.0));
    bn.forward(x, true);
    CHECK(bn.running_mean(0, 0) == doctest::Approx(0.9 * 0.5 + 0.1 * 5.0));
}

TEST_CASE("batchnorm inference uses running statistics and update_running gates the EMA") {
    Rng rng(7);
    BatchNormLayer bn(3);
    Matrix x = random_matrix(8, 3, rng);
    bn.forward(x, true, false);
    CHECK(bn.running_mean(0, 0) == 0.0);  // untouched
    CHECK(bn.running_var(0, 1) == 1.0);

    bn.forward(x, true, true);
    Matrix mean_after = bn.running_mean;
    Matrix other = random_matrix(5, 3, rng);
    Matrix y = bn.forward(other, false);
    CHECK(bn.running_mean.data == mean_after.data);  // inference never updates
    for (int j = 0; j < 3; ++j) {
        double expect = (other(0, j) - bn.running_mean(0, j)) /
                        std::sqrt(bn.running_var(0, j) + bn.epsilon);
        CHECK(y(0, j) == doctest::Approx(expect));
    }
}

TEST_CASE("batchnorm rejects single-row training batches") {
    BatchNormLayer bn(2);
    CHECK_THROWS_AS(bn.forward(Matrix(1, 2, 1.0), true), std::invalid_argument);
    CHECK_NOTHROW(bn.forward(Matrix(1, 2, 1.0), false));
}

TEST_CASE("batchnorm training backward matches finite differences") {
    Rng rng(8);
    BatchNormLayer bn(4);
    for (double& v : bn.gamma.data) v = 0.5 + rng.uniform(0.0, 1.0);
    for (double& v : bn.beta.data) v = rng.gaussian();
    Matrix x = random_matrix(6, 4, rng);
    std::vector<int> labels = testutil::random_labels(6, 4, rng);

    auto loss = [&] { return softmax_cross_entropy(bn.forward(x, true, false), labels).loss; };
    auto ce = softmax_cross_entropy(bn.forward(x, true, false), labels);
    bn.zero_grads();
    Matrix dx = bn.backward(ce.d_logits);
    Matrix dx_copy = dx;
    std::vector<ParamRef> params;
    bn.collect_params(params);
    CHECK(testutil::check_params(params, loss) < 1e-6);

    Matrix dx_numeric = testutil::numeric_gradient(x, loss);
    CHECK(testutil::max_rel_error(dx_copy, dx_numeric) < 1e-6);
}

TEST_CASE("softmax cross entropy: uniform logits cost ln C") {
    Matrix logits(2, 3, 0.0);
    auto ce = softmax_cross_entropy(logits, {0, 2});
    CHECK(ce.loss == doctest::Approx(std::log(3.0)));
    // gradient rows sum to zero and scale by 1/B
    double row_sum = 0.0;
    for (int j = 0; j < 3; ++j) row_sum += ce.d_logits(0, j);
    CHECK(row_sum == doctest::Approx(0.0));
    CHECK(ce.d_logits(0, 0) == doctest::Approx((1.0 / 3.0 - 1.0) / 2.0));
    CHECK(ce.d_logits(0, 1) == doctest::Approx((1.0 / 3.0) / 2.0));
}

TEST_CASE("softmax cross entropy: huge logit gap neither overflows nor explodes") {
    Matrix logits(1, 2);
    logits(0, 0) = 1000.0;
    logits(0, 1) = 0.0;
    auto ce = softmax_cross_entropy(logits, {0});
    CHECK(ce.loss == doctest::Approx(0.0));
    CHECK(ce.d_logits.all_finite());
}

TEST_CASE("softmax cross entropy rejects out-of-range labels") {
    Matrix logits(2, 3, 0.0);
    CHECK_THROWS_AS(softmax_cross_entropy(logits, {0, 3}), std::invalid_argument);
    CHECK_THROWS_AS(softmax_cross_entropy(logits, {-1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(softmax_cross_entropy(logits, {0}), std::invalid_argument);
}

TEST_CASE("adam: zero gradient leaves parameters untouched") {
    DenseLayer dense(2, 2);
    dense.weights(0, 0) = 1.25;
    Matrix before = dense.weights;
    Adam adam;
    std::vector<ParamRef> params;
    dense.collect_params(params);
    adam.step(params);
    CHECK(dense.weights.data == before.data);
    CHECK(adam.step_count() == 1);
}

TEST_CASE("adam: bias-corrected first step has magnitude close to lr") {
    DenseLayer dense(1, 1);
    dense.grad_weights(0, 0) = 0.37;
    Adam adam({.lr = 1e-3});
    std::vector<ParamRef> params;
    dense.collect_params(params);
    adam.step(params);
    CHECK(std::fabs(dense.weights(0, 0)) == doctest::Approx(1e-3).epsilon(1e-4));
    CHECK(dense.weights(0, 0) < 0.0);  // moved against the gradient
}

TEST_CASE("adam: three steps on f(w)=w^2 match the hand-unrolled recurrence") {
    DenseLayer dense(1, 1);
    dense.weights(0, 0) = 1.0;
    Adam adam({.lr = 0.1});
    std::vector<ParamRef> params;
    dense.collect_params(params);

    double w_ref = 1.0, m = 0.0, v = 0.0;
    const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    for (int t = 1; t <= 3; ++t) {
        dense.zero_grads();
        dense.grad_weights(0, 0) = 2.0 * dense.weights(0, 0);
        adam.step(params);

        double g = 2.0 * w_ref;
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        double m_hat = m / (1.0 - std::pow(b1, t));
        double v_hat = v / (1.0 - std::pow(b2, t));
        w_ref -= lr * m_hat / (std::sqrt(v_hat) + eps);
        CHECK(dense.weights(0, 0) == doctest::Approx(w_ref).epsilon(1e-12));
    }
    CHECK(adam.step_count() == 3);
}

TEST_CASE("adam aborts on non-finite gradients") {
    DenseLayer dense(1, 1);
    dense.grad_weights(0, 0) = std::nan("");
    Adam adam;
    std::vector<ParamRef> params;
    dense.collect_params(params);
    CHECK_THROWS_AS(adam.step(params), std::runtime_error);
}

TEST_CASE("adam rejects a changed parameter list") {
    DenseLayer a(2, 2), b(3, 3);
    Adam adam;
    std::vector<ParamRef> pa, pb;
    a.collect_params(pa);
    b.collect_params(pb);
    adam.step(pa);
    CHECK_THROWS_AS(adam.step(pb), std::invalid_argument);
}

TEST_CASE("mlp with a single dense block equals the dense layer itself") {
    Rng rng(9);
    DenseLayer dense(3, 2);
    dense.init(rng);
    Mlp net;
    net.blocks.emplace_back(dense);
    Matrix x = random_matrix(4, 3, rng);
    Matrix direct = dense.forward(x);
    Matrix through = net.forward(x, true);
    CHECK(direct.data == through.data);
}

TEST_CASE("mlp: zero-input zero-bias network emits zeros") {
    Rng rng(10);
    Mlp net;
    net.blocks.emplace_back(DenseLayer(4, 3));
    net.blocks.emplace_back(LeakyReluLayer(0.01));
    net.blocks.emplace_back(DenseLayer(3, 2));
    net.init(rng);  // biases stay zero
    Matrix y = net.forward(Matrix(5, 4, 0.0), true);
    for (double v : y.data) CHECK(v == 0.0);
}

TEST_CASE("mlp param_count matches the block shapes") {
    Mlp net;
    net.blocks.emplace_back(DenseLayer(4, 3));
    net.blocks.emplace_back(BatchNormLayer(3));
    net.blocks.emplace_back(LeakyReluLayer(0.01));
    net.blocks.emplace_back(DenseLayer(3, 2));
    CHECK(net.param_count() == (4 * 3 + 3) + (3 + 3) + (3 * 2 + 2));
}

TEST_CASE("mlp dense->leakyrelu->dense full finite-difference sweep") {
    Rng rng(20);
    Mlp net;
    net.blocks.emplace_back(DenseLayer(5, 4));
    net.blocks.emplace_back(LeakyReluLayer(0.01));
    net.blocks.emplace_back(DenseLayer(4, 3));
    net.init(rng);
    Matrix x = random_matrix(6, 5, rng);
    std::vector<int> labels = testutil::random_labels(6, 3, rng);

    auto loss = [&] { return softmax_cross_entropy(net.forward(x, true, false), labels).loss; };
    auto ce = softmax_cross_entropy(net.forward(x, true, false), labels);
    net.zero_grads();
    net.backward(ce.d_logits);
    CHECK(testutil::check_params(net.params(), loss) < 1e-4);
}

TEST_CASE("mlp with batchnorm backward matches finite differences") {
    Rng rng(21);
    Mlp net;
    net.blocks.emplace_back(DenseLayer(4, 6));
    net.blocks.emplace_back(BatchNormLayer(6));
    net.blocks.emplace_back(LeakyReluLayer(0.01));
    net.blocks.emplace_back(DenseLayer(6, 2));
    net.init(rng);
    Matrix x = random_matrix(8, 4, rng);
    std::vector<int> labels = testutil::random_labels(8, 2, rng);

    auto loss = [&] { return softmax_cross_entropy(net.forward(x, true, false), labels).loss; };
    auto ce = softmax_cross_entropy(net.forward(x, true, false), labels);
    net.zero_grads();
    net.backward(ce.d_logits);
    CHECK(testutil::check_params(net.params(), loss) < 1e-4);
}
