#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <stdexcept>

#include "cn/kernels.hpp"
#include "cn/rng.hpp"
#include "gradcheck.hpp"

using cn::Matrix;
using cn::Rng;
namespace k = cn::kernels;
using testutil::random_matrix;

namespace {

bool bitwise_equal(const Matrix& a, const Matrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

}  // namespace

TEST_CASE("matmul matches a naive triple-loop product") {
    Rng rng(11);
    Matrix a = random_matrix(3, 4, rng);
    Matrix b = random_matrix(4, 5, rng);
    Matrix c = k::matmul(a, b);
    REQUIRE(c.rows == 3);
    REQUIRE(c.cols == 5);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 5; ++j) {
            double expect = 0.0;
            for (int t = 0; t < 4; ++t) expect += a(i, t) * b(t, j);
            CHECK(c(i, j) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("matmul_nt and matmul_tn agree with explicit transposition") {
    Rng rng(12);
    Matrix a = random_matrix(5, 7, rng);
    Matrix b = random_matrix(6, 7, rng);  // a * b^T
    Matrix nt = k::matmul_nt(a, b);
    Matrix bt(7, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 7; ++j) bt(j, i) = b(i, j);
    Matrix ref = k::matmul(a, bt);
    for (size_t i = 0; i < nt.data.size(); ++i)
        CHECK(nt.data[i] == doctest::Approx(ref.data[i]).epsilon(1e-12));

    Matrix d = random_matrix(5, 3, rng);  // a^T * d needs a 5-row left side
    Matrix tn = k::matmul_tn(a, d);
    REQUIRE(tn.rows == 7);
    REQUIRE(tn.cols == 3);
    Matrix at(7, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 7; ++j) at(j, i) = a(i, j);
    Matrix ref2 = k::matmul(at, d);
    for (size_t i = 0; i < tn.data.size(); ++i)
        CHECK(tn.data[i] == doctest::Approx(ref2.data[i]).epsilon(1e-12));
}

TEST_CASE("matmul rejects mismatched shapes") {
    Matrix a(2, 3, 1.0);
    Matrix b(4, 2, 1.0);
    CHECK_THROWS_AS(k::matmul(a, b), std::invalid_argument);
    CHECK_THROWS_AS(k::matmul_nt(a, Matrix(2, 4, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(k::matmul_tn(a, Matrix(3, 3, 1.0)), std::invalid_argument);
}

TEST_CASE("parallel kernels are bitwise identical to the serial reference") {
    Rng rng(13);
    // Sizes straddle the parallel-dispatch thresholds on both sides.
    for (auto [m, n, kk] : {std::tuple{3, 4, 5}, {17, 9, 33}, {40, 40, 40}, {128, 64, 96}}) {
        Matrix a = random_matrix(m, kk, rng);
        Matrix b = random_matrix(kk, n, rng);
        CHECK(bitwise_equal(k::matmul(a, b), k::serial::matmul(a, b)));
        Matrix bt = random_matrix(n, kk, rng);
        CHECK(bitwise_equal(k::matmul_nt(a, bt), k::serial::matmul_nt(a, bt)));
        Matrix d = random_matrix(m, n, rng);
        CHECK(bitwise_equal(k::matmul_tn(a, d), k::serial::matmul_tn(a, d)));
    }

    for (auto [rows, cols] : {std::pair{4, 6}, {100, 50}, {300, 70}}) {
        Matrix x = random_matrix(rows, cols, rng);
        Matrix v = random_matrix(1, cols, rng);
        Matrix xs = x;
        Matrix xp = x;
        k::serial::add_row_vector(xs, v);
        k::add_row_vector(xp, v);
        CHECK(bitwise_equal(xs, xp));

        CHECK(bitwise_equal(k::col_sums(x), k::serial::col_sums(x)));

        Matrix ms(1, cols), vs(1, cols), mp(1, cols), vp(1, cols);
        k::serial::col_mean_var(x, ms, vs);
        k::col_mean_var(x, mp, vp);
        CHECK(bitwise_equal(ms, mp));
        CHECK(bitwise_equal(vs, vp));

        CHECK(bitwise_equal(k::leaky_relu(x, 0.01), k::serial::leaky_relu(x, 0.01)));
        Matrix dy = random_matrix(rows, cols, rng);
        CHECK(bitwise_equal(k::leaky_relu_grad(x, dy, 0.01),
                            k::serial::leaky_relu_grad(x, dy, 0.01)));
        CHECK(bitwise_equal(k::softmax_rows(x), k::serial::softmax_rows(x)));
    }
}

TEST_CASE("parallel adam_update is bitwise identical to the serial reference") {
    Rng rng(14);
    Matrix ps = random_matrix(60, 80, rng);
    Matrix pp = ps;
    Matrix grad = random_matrix(60, 80, rng);
    Matrix m1s(60, 80), m2s(60, 80), m1p(60, 80), m2p(60, 80);
    for (int t = 1; t <= 3; ++t) {
        double c1 = 1.0 - std::pow(0.9, t);
        double c2 = 1.0 - std::pow(0.999, t);
        k::serial::adam_update(ps, grad, m1s, m2s, 1e-3, 0.9, 0.999, 1e-8, c1, c2);
        k::adam_update(pp, grad, m1p, m2p, 1e-3, 0.9, 0.999, 1e-8, c1, c2);
    }
    CHECK(ps.data == pp.data);
    CHECK(m1s.data == m1p.data);
    CHECK(m2s.data == m2p.data);
}

TEST_CASE("col_mean_var computes population statistics") {
    Matrix x(2, 1);
    x(0, 0) = 4.0;
    x(1, 0) = 6.0;
    Matrix mean(1, 1), var(1, 1);
    k::col_mean_var(x, mean, var);
    CHECK(mean(0, 0) == doctest::Approx(5.0));
    CHECK(var(0, 0) == doctest::Approx(1.0));  // divided by N, not N-1
}

TEST_CASE("softmax_rows survives extreme logits") {
    Matrix x(1, 2);
    x(0, 0) = 1000.0;
    x(0, 1) = 0.0;
    Matrix p = k::softmax_rows(x);
    CHECK(p(0, 0) == doctest::Approx(1.0));
    CHECK(p(0, 1) == doctest::Approx(0.0));
    CHECK(p.all_finite());
}
