#include "cn/pca.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cn/rng.hpp"

namespace cn {
namespace {

constexpr double kConvergenceTol = 1e-10;
constexpr int kMaxIterations = 100000;

std::vector<double> matvec(const Matrix& a, const std::vector<double>& v) {
    std::vector<double> out(a.rows, 0.0);
    for (int i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols; ++j) s += a(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Power iteration on the PSD matrix c, keeping the iterate orthogonal to
// `against` when given. The start vector comes from a fixed stream so runs
// are reproducible.
std::vector<double> power_iterate(const Matrix& c, const std::vector<double>* against, Rng& rng) {
    int d = c.rows;
    std::vector<double> v(d);
    for (;;) {
        for (int i = 0; i < d; ++i) v[i] = rng.gaussian();
        if (against) {
            double p = dot(v, *against);
            for (int i = 0; i < d; ++i) v[i] -= p * (*against)[i];
        }
        double n = norm(v);
        if (n > 1e-12) {
            for (int i = 0; i < d; ++i) v[i] /= n;
            break;
        }
    }

    for (int it = 0; it < kMaxIterations; ++it) {
        std::vector<double> w = matvec(c, v);
        if (against) {
            double p = dot(w, *against);
            for (int i = 0; i < d; ++i) w[i] -= p * (*against)[i];
        }
        double n = norm(w);
        if (n < 1e-300) break;  // iterate fell into the null space; v is as good as it gets
        double delta = 0.0;
        for (int i = 0; i < d; ++i) {
            w[i] /= n;
            delta = std::max(delta, std::fabs(w[i] - v[i]));
        }
        v = std::move(w);
        if (delta < kConvergenceTol) break;
    }
    return v;
}

void fix_sign(std::vector<double>& v) {
    int best = 0;
    for (size_t i = 1; i < v.size(); ++i)
        if (std::fabs(v[i]) > std::fabs(v[best])) best = static_cast<int>(i);
    if (v[best] < 0.0)
        for (double& x : v) x = -x;
}

}  // namespace

PcaResult pca_top2(const Matrix& x) {
    require(x.rows >= 3, "pca_top2: need at least three rows");
    require(x.cols >= 2, "pca_top2: need at least two columns");

    int n = x.rows;
    int d = x.cols;
    std::vector<double> mean(d, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) mean[j] += x(i, j);
    for (int j = 0; j < d; ++j) mean[j] /= n;

    Matrix centered(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) centered(i, j) = x(i, j) - mean[j];

    Matrix cov(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += centered(i, a) * centered(i, b);
            s /= (n - 1);
            cov(a, b) = s;
            cov(b, a) = s;
        }

    double trace = 0.0;
    for (int j = 0; j < d; ++j) trace += cov(j, j);
    if (trace < 1e-30)
        throw std::runtime_error("pca_top2: input has no variance");

    Rng rng(0x9e3779b97f4a7c15ULL);
    std::vector<double> v1 = power_iterate(cov, nullptr, rng);
    fix_sign(v1);
    double lambda1 = dot(v1, matvec(cov, v1));

    std::vector<double> v2;
    double lambda2 = 0.0;
    double residual = trace - lambda1;
    if (residual > 1e-12 * trace) {
        v2 = power_iterate(cov, &v1, rng);
        fix_sign(v2);
        lambda2 = std::max(0.0, dot(v2, matvec(cov, v2)));
    } else {
        // Rank-1 input: take a deterministic direction orthogonal to v1.
        int weakest = 0;
        for (int j = 1; j < d; ++j)
            if (std::fabs(v1[j]) < std::fabs(v1[weakest])) weakest = j;
        v2.assign(d, 0.0);
        v2[weakest] = 1.0;
        double p = dot(v2, v1);
        for (int j = 0; j < d; ++j) v2[j] -= p * v1[j];
        double nn = norm(v2);
        for (int j = 0; j < d; ++j) v2[j] /= nn;
        fix_sign(v2);
    }

    PcaResult result;
    result.lambda1 = lambda1;
    result.lambda2 = lambda2;
    result.explained_fraction = std::min(1.0, std::max(0.0, (lambda1 + lambda2) / trace));
    result.components = Matrix(2, d);
    for (int j = 0; j < d; ++j) {
        result.components(0, j) = v1[j];
        result.components(1, j) = v2[j];
    }
    result.coords = Matrix(n, 2);
    for (int i = 0; i < n; ++i) {
        double c1 = 0.0, c2 = 0.0;
        for (int j = 0; j < d; ++j) {
            c1 += centered(i, j) * v1[j];
            c2 += centered(i, j) * v2[j];
        }
        result.coords(i, 0) = c1;
        result.coords(i, 1) = c2;
    }
    return result;
}

}  // namespace cn
