#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "cn/kernels.hpp"
#include "cn/rng.hpp"

using cn::Matrix;
using cn::Rng;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.gaussian();
    return m;
}

template <typename F>
double time_ms(F&& fn, int reps) {
    fn();  // warm up
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i)
        worst = std::max(worst, std::fabs(a.data[i] - b.data[i]));
    return worst;
}

void report(const char* name, const char* shape, double serial_ms, double parallel_ms,
            double diff) {
    std::printf("%-14s %-18s %10.3f %10.3f %8.2fx %10.2e\n", name, shape, serial_ms, parallel_ms,
                serial_ms / parallel_ms, diff);
}

}  // namespace

int main() {
    Rng rng(1);
    std::printf("%-14s %-18s %10s %10s %9s %10s\n", "kernel", "shape", "serial ms",
                "openmp ms", "speedup", "max diff");

    for (int n : {64, 128, 256, 512}) {
        Matrix a = random_matrix(n, n, rng);
        Matrix b = random_matrix(n, n, rng);
        int reps = std::max(1, (1 << 27) / (n * n * n));
        Matrix serial_out, parallel_out;
        double s = time_ms([&] { serial_out = cn::kernels::serial::matmul(a, b); }, reps);
        double p = time_ms([&] { parallel_out = cn::kernels::matmul(a, b); }, reps);
        char shape[32];
        std::snprintf(shape, sizeof shape, "%dx%d * %dx%d", n, n, n, n);
        report("matmul", shape, s, p, max_abs_diff(serial_out, parallel_out));
    }

    {
        // Typical training shapes: a minibatch against a wide weight matrix.
        Matrix x = random_matrix(512, 384, rng);
        Matrix w = random_matrix(128, 384, rng);
        Matrix serial_out, parallel_out;
        double s = time_ms([&] { serial_out = cn::kernels::serial::matmul_nt(x, w); }, 20);
        double p = time_ms([&] { parallel_out = cn::kernels::matmul_nt(x, w); }, 20);
        report("matmul_nt", "512x384 * (128)^T", s, p, max_abs_diff(serial_out, parallel_out));
    }

    {
        Matrix d = random_matrix(512, 128, rng);
        Matrix x = random_matrix(512, 384, rng);
        Matrix serial_out, parallel_out;
        double s = time_ms([&] { serial_out = cn::kernels::serial::matmul_tn(d, x); }, 20);
        double p = time_ms([&] { parallel_out = cn::kernels::matmul_tn(d, x); }, 20);
        report("matmul_tn", "(512x128)^T * x", s, p, max_abs_diff(serial_out, parallel_out));
    }

    for (int rows : {4096, 16384}) {
        Matrix x = random_matrix(rows, 256, rng);
        Matrix serial_out, parallel_out;
        int reps = 50;
        double s = time_ms([&] { serial_out = cn::kernels::serial::leaky_relu(x, 0.01); }, reps);
        double p = time_ms([&] { parallel_out = cn::kernels::leaky_relu(x, 0.01); }, reps);
        char shape[32];
        std::snprintf(shape, sizeof shape, "%dx256", rows);
        report("leaky_relu", shape, s, p, max_abs_diff(serial_out, parallel_out));
    }

    {
        Matrix x = random_matrix(8192, 128, rng);
        Matrix serial_out, parallel_out;
        double s = time_ms([&] { serial_out = cn::kernels::serial::softmax_rows(x); }, 50);
        double p = time_ms([&] { parallel_out = cn::kernels::softmax_rows(x); }, 50);
        report("softmax_rows", "8192x128", s, p, max_abs_diff(serial_out, parallel_out));
    }

    {
        Matrix x = random_matrix(16384, 64, rng);
        Matrix sm(1, 64), sv(1, 64), pm(1, 64), pv(1, 64);
        double s = time_ms([&] { cn::kernels::serial::col_mean_var(x, sm, sv); }, 50);
        double p = time_ms([&] { cn::kernels::col_mean_var(x, pm, pv); }, 50);
        report("col_mean_var", "16384x64", s, p,
               std::max(max_abs_diff(sm, pm), max_abs_diff(sv, pv)));
    }
    return 0;
}
