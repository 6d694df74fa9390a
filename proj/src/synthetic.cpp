#include "cn/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "cn/rng.hpp"

namespace cn {
namespace {

// Dense Cholesky factor L with A = L L^T; the signal covariance is SPD for
// any positive noise scale.
Matrix cholesky(const Matrix& a) {
    int n = a.rows;
    Matrix l(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = a(i, j);
            for (int k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
            if (i == j) {
                if (sum <= 0.0)
                    throw std::runtime_error("cholesky: matrix is not positive definite");
                l(i, i) = std::sqrt(sum);
            } else {
                l(i, j) = sum / l(j, j);
            }
        }
    }
    return l;
}

std::vector<double> cholesky_solve(const Matrix& l, const std::vector<double>& b) {
    int n = l.rows;
    std::vector<double> y(n), x(n);
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

}  // namespace

void SyntheticSpec::validate() const {
    require(modalities >= 2, "SyntheticSpec: need at least two modalities");
    require(samples >= 2, "SyntheticSpec: need at least two samples");
    require(latent_dim >= 1, "SyntheticSpec: latent_dim must be positive");
    require(signal_dims >= 1, "SyntheticSpec: signal_dims must be positive");
    require(distractor_dims >= 0, "SyntheticSpec: distractor_dims must be non-negative");
    require(strength >= 0.0, "SyntheticSpec: strength must be non-negative");
    require(noise_scale > 0.0, "SyntheticSpec: noise_scale must be positive");
    require(balance > 0.0 && balance < 1.0, "SyntheticSpec: balance must lie in (0, 1)");
}

SyntheticData generate_synthetic(const SyntheticSpec& spec, uint64_t seed) {
    spec.validate();
    Rng rng(seed);

    SyntheticData out;
    out.spec = spec;
    double scale = 1.0 / std::sqrt(static_cast<double>(spec.latent_dim));
    for (int m = 0; m < spec.modalities; ++m) {
        Matrix a(spec.signal_dims, spec.latent_dim);
        for (int i = 0; i < a.rows; ++i)
            for (int j = 0; j < a.cols; ++j) a(i, j) = scale * rng.gaussian();
        out.loadings.push_back(std::move(a));
    }

    Dataset& data = out.dataset;
    data.class_names = {"0", "1"};
    for (int m = 1; m <= spec.modalities; ++m) {
        for (int j = 1; j <= spec.signal_dims; ++j)
            data.feature_names.push_back("m" + std::to_string(m) + "_s" + std::to_string(j));
        for (int j = 1; j <= spec.distractor_dims; ++j)
            data.feature_names.push_back("m" + std::to_string(m) + "_n" + std::to_string(j));
    }

    double half = spec.strength / 2.0;
    std::vector<double> latent(spec.latent_dim);
    for (int i = 0; i < spec.samples; ++i) {
        FeatureRecord rec;
        rec.id = "s" + std::to_string(i + 1);
        rec.label = rng.uniform(0.0, 1.0) < spec.balance ? 1 : 0;
        double center = rec.label == 1 ? half : -half;
        for (int j = 0; j < spec.latent_dim; ++j) latent[j] = center + rng.gaussian();
        rec.features.reserve(spec.total_dims());
        for (int m = 0; m < spec.modalities; ++m) {
            const Matrix& a = out.loadings[m];
            for (int r = 0; r < spec.signal_dims; ++r) {
                double v = 0.0;
                for (int j = 0; j < spec.latent_dim; ++j) v += a(r, j) * latent[j];
                rec.features.push_back(v + spec.noise_scale * rng.gaussian());
            }
            for (int r = 0; r < spec.distractor_dims; ++r) rec.features.push_back(rng.gaussian());
        }
        rec.missing.assign(spec.total_dims(), 0);
        data.records.push_back(std::move(rec));
    }
    return out;
}

ModalityPartition synthetic_partition(const SyntheticSpec& spec) {
    ModalityPartition p;
    p.total_dims = spec.total_dims();
    int next = 0;
    for (int m = 1; m <= spec.modalities; ++m) {
        ModalityPartition::Group g;
        g.name = "m" + std::to_string(m);
        for (int j = 0; j < spec.dims_per_modality(); ++j) g.indices.push_back(next++);
        p.groups.push_back(std::move(g));
    }
    p.validate();
    return p;
}

std::vector<std::pair<std::string, std::string>> synthetic_modality_map(const SyntheticSpec& spec) {
    spec.validate();
    std::vector<std::pair<std::string, std::string>> map;
    for (int m = 1; m <= spec.modalities; ++m) {
        std::string group = "m" + std::to_string(m);
        for (int j = 1; j <= spec.signal_dims; ++j)
            map.emplace_back(group + "_s" + std::to_string(j), group);
        for (int j = 1; j <= spec.distractor_dims; ++j)
            map.emplace_back(group + "_n" + std::to_string(j), group);
    }
    return map;
}

double estimate_bayes_accuracy(const SyntheticData& data, int n_samples, uint64_t seed) {
    const SyntheticSpec& spec = data.spec;
    spec.validate();
    require(n_samples >= 1, "estimate_bayes_accuracy: n_samples must be positive");
    require(static_cast<int>(data.loadings.size()) == spec.modalities,
            "estimate_bayes_accuracy: loadings do not match the spec");

    // Stack the per-modality loadings over the signal dimensions. The shared
    // latent vector correlates modalities, so the covariance is dense:
    // sigma = A A^T + noise^2 I with the stacked A.
    int ds = spec.modalities * spec.signal_dims;
    Matrix stacked(ds, spec.latent_dim);
    for (int m = 0; m < spec.modalities; ++m)
        for (int r = 0; r < spec.signal_dims; ++r)
            for (int j = 0; j < spec.latent_dim; ++j)
                stacked(m * spec.signal_dims + r, j) = data.loadings[m](r, j);

    Matrix sigma(ds, ds);
    for (int i = 0; i < ds; ++i) {
        for (int j = 0; j < ds; ++j) {
            double v = 0.0;
            for (int k = 0; k < spec.latent_dim; ++k) v += stacked(i, k) * stacked(j, k);
            sigma(i, j) = v;
        }
        sigma(i, i) += spec.noise_scale * spec.noise_scale;
    }

    // Class-mean difference over the signal dimensions: A (c1 - c0).
    std::vector<double> delta(ds, 0.0);
    for (int i = 0; i < ds; ++i)
        for (int k = 0; k < spec.latent_dim; ++k) delta[i] += stacked(i, k) * spec.strength;

    Matrix l = cholesky(sigma);
    std::vector<double> w = cholesky_solve(l, delta);
    double prior_shift = std::log(spec.balance / (1.0 - spec.balance));

    Rng rng(seed);
    double half = spec.strength / 2.0;
    std::vector<double> latent(spec.latent_dim);
    std::vector<double> x(ds);
    int hits = 0;
    for (int i = 0; i < n_samples; ++i) {
        int label = rng.uniform(0.0, 1.0) < spec.balance ? 1 : 0;
        double center = label == 1 ? half : -half;
        for (int j = 0; j < spec.latent_dim; ++j) latent[j] = center + rng.gaussian();
        for (int r = 0; r < ds; ++r) {
            double v = 0.0;
            for (int k = 0; k < spec.latent_dim; ++k) v += stacked(r, k) * latent[k];
            x[r] = v + spec.noise_scale * rng.gaussian();
        }
        double score = prior_shift;
        for (int r = 0; r < ds; ++r) score += w[r] * x[r];
        int decision = score > 0.0 ? 1 : 0;
        if (decision == label) ++hits;
    }
    return static_cast<double>(hits) / n_samples;
}

}  // namespace cn
