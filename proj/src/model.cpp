#include "cn/model.hpp"

#include <cmath>
#include <stdexcept>

#include "cn/kernels.hpp"
#include "cn/loss.hpp"

namespace cn {

namespace {

Mlp make_ephysician(int in_dim, const ModelConfig& cfg) {
    Mlp net;
    net.blocks.emplace_back(DenseLayer(in_dim, cfg.hidden_dim));
    net.blocks.emplace_back(BatchNormLayer(cfg.hidden_dim, cfg.bn_epsilon, cfg.bn_momentum));
    net.blocks.emplace_back(LeakyReluLayer(cfg.leaky_slope));
    net.blocks.emplace_back(DenseLayer(cfg.hidden_dim, cfg.rep_dim));
    return net;
}

}  // namespace

ConsensusModel::ConsensusModel(ModalityPartition partition, int n_classes, ModelConfig cfg)
    : partition_(std::move(partition)), cfg_(cfg), n_classes_(n_classes) {
    partition_.validate();
    require(n_classes_ >= 2, "ConsensusModel: need at least 2 classes");
    require(cfg_.hidden_dim >= 1 && cfg_.rep_dim >= 1,
            "ConsensusModel: layer widths must be >= 1");

    for (const auto& group : partition_.groups)
        ephysicians_.push_back(make_ephysician(static_cast<int>(group.indices.size()), cfg_));

    classifier_.blocks.emplace_back(
        DenseLayer(modality_count() * cfg_.rep_dim, n_classes_));
    discriminator_.blocks.emplace_back(DenseLayer(cfg_.rep_dim, disc_class_count()));
}

void ConsensusModel::init(Rng& rng) {
    for (Mlp& e : ephysicians_) e.init(rng);
    classifier_.init(rng);
    discriminator_.init(rng);
}

int ConsensusModel::disc_class_count() const {
    return modality_count() + (cfg_.noise_enabled ? 1 : 0);
}

std::vector<Matrix> ConsensusModel::encode_all(const Matrix& x, bool training,
                                               bool update_running) {
    require_cols(x, partition_.total_dims, "encode_all");
    std::vector<Matrix> reps;
    reps.reserve(ephysicians_.size());
    for (size_t m = 0; m < ephysicians_.size(); ++m) {
        Matrix xm = select_columns(x, partition_.groups[m].indices);
        reps.push_back(ephysicians_[m].forward(xm, training, update_running));
    }
    return reps;
}

Matrix ConsensusModel::sample_noise(const std::vector<Matrix>& reps, Rng& rng) const {
    if (!cfg_.noise_enabled)
        throw std::logic_error("sample_noise: noise modality is disabled");
    if (static_cast<int>(reps.size()) != modality_count())
        throw std::invalid_argument("sample_noise: wrong number of representations");

    const int b = reps[0].rows;
    const int r = cfg_.rep_dim;
    const long total = static_cast<long>(reps.size()) * b;

    Matrix mu(1, r), var(1, r);
    for (int j = 0; j < r; ++j) {
        double sum = 0.0;
        for (const Matrix& rep : reps)
            for (int i = 0; i < b; ++i) sum += rep(i, j);
        const double mean = sum / total;
        double sq = 0.0;
        for (const Matrix& rep : reps)
            for (int i = 0; i < b; ++i) {
                const double d = rep(i, j) - mean;
                sq += d * d;
            }
        mu(0, j) = mean;
        var(0, j) = sq / total;
    }

    Matrix noise(b, r);
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < r; ++j)
            noise(i, j) = mu(0, j) + std::sqrt(var(0, j)) * rng.gaussian();
    return noise;
}

Matrix ConsensusModel::stack_disc_input(const std::vector<Matrix>& reps,
                                        const Matrix* noise,
                                        std::vector<int>& labels_out) const {
    if (static_cast<int>(reps.size()) != modality_count())
        throw std::invalid_argument("discriminator loss: wrong number of representations");
    if (cfg_.noise_enabled && noise == nullptr)
        throw std::invalid_argument("discriminator loss: noise block required");
    if (!cfg_.noise_enabled && noise != nullptr)
        throw std::invalid_argument("discriminator loss: noise block given but disabled");

    const int b = reps[0].rows;
    const int r = cfg_.rep_dim;
    const int blocks = disc_class_count();
    Matrix stacked(blocks * b, r);
    labels_out.assign(static_cast<size_t>(blocks) * b, 0);

    int row = 0;
    auto append = [&](const Matrix& block, int cls) {
        require(block.rows == b && block.cols == r,
                "discriminator loss: representation shape mismatch");
        for (int i = 0; i < b; ++i, ++row) {
            for (int j = 0; j < r; ++j) stacked(row, j) = block(i, j);
            labels_out[row] = cls;
        }
    };

    if (cfg_.noise_enabled) append(*noise, 0);
    const int first_real = cfg_.noise_enabled ? 1 : 0;
    for (size_t m = 0; m < reps.size(); ++m)
        append(reps[m], first_real + static_cast<int>(m));
    return stacked;
}

double ConsensusModel::discriminator_loss(const std::vector<Matrix>& reps,
                                          const Matrix* noise) {
    std::vector<int> labels;
    Matrix stacked = stack_disc_input(reps, noise, labels);
    Matrix logits = discriminator_.forward(stacked, /*training=*/true);
    return softmax_cross_entropy(logits, labels).loss;
}

double ConsensusModel::discriminator_loss_backward(const std::vector<Matrix>& reps,
                                                   const Matrix* noise,
                                                   bool into_ephysicians) {
    std::vector<int> labels;
    Matrix stacked = stack_disc_input(reps, noise, labels);
    Matrix logits = discriminator_.forward(stacked, /*training=*/true);
    SoftmaxCrossEntropy ce = softmax_cross_entropy(logits, labels);
    Matrix d_stacked = discriminator_.backward(ce.d_logits);

    if (into_ephysicians) {
        const int b = reps[0].rows;
        const int r = cfg_.rep_dim;
        const int offset = cfg_.noise_enabled ? b : 0;  // noise rows carry no gradient
        for (size_t m = 0; m < ephysicians_.size(); ++m) {
            Matrix d_rep(b, r);
            const int base = offset + static_cast<int>(m) * b;
            for (int i = 0; i < b; ++i)
                for (int j = 0; j < r; ++j) d_rep(i, j) = d_stacked(base + i, j);
            ephysicians_[m].backward(d_rep);
        }
    }
    return ce.loss;
}

Matrix ConsensusModel::concat_reps(const std::vector<Matrix>& reps) {
    if (reps.empty()) throw std::invalid_argument("concat_reps: empty list");
    const int b = reps[0].rows;
    int total = 0;
    for (const Matrix& r : reps) {
        if (r.rows != b) throw std::invalid_argument("concat_reps: row mismatch");
        total += r.cols;
    }
    Matrix out(b, total);
    int col = 0;
    for (const Matrix& r : reps) {
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < r.cols; ++j) out(i, col + j) = r(i, j);
        col += r.cols;
    }
    return out;
}

double ConsensusModel::classifier_loss(const std::vector<Matrix>& reps,
                                       const std::vector<int>& labels) {
    Matrix logits = classifier_.forward(concat_reps(reps), /*training=*/true);
    return softmax_cross_entropy(logits, labels).loss;
}

double ConsensusModel::classifier_loss_backward(const std::vector<Matrix>& reps,
                                                const std::vector<int>& labels,
                                                bool into_ephysicians) {
    Matrix logits = classifier_.forward(concat_reps(reps), /*training=*/true);
    SoftmaxCrossEntropy ce = softmax_cross_entropy(logits, labels);
    Matrix d_concat = classifier_.backward(ce.d_logits);

    if (into_ephysicians) {
        const int b = reps[0].rows;
        const int r = cfg_.rep_dim;
        for (size_t m = 0; m < ephysicians_.size(); ++m) {
            Matrix d_rep(b, r);
            const int base = static_cast<int>(m) * r;
            for (int i = 0; i < b; ++i)
                for (int j = 0; j < r; ++j) d_rep(i, j) = d_concat(i, base + j);
            ephysicians_[m].backward(d_rep);
        }
    }
    return ce.loss;
}

Matrix ConsensusModel::class_probabilities(const Matrix& x) {
    std::vector<Matrix> reps = encode_all(x, /*training=*/false);
    Matrix logits = classifier_.forward(concat_reps(reps), /*training=*/false);
    return kernels::softmax_rows(logits);
}

std::vector<int> ConsensusModel::predict(const Matrix& x) {
    Matrix probs = class_probabilities(x);
    std::vector<int> out(probs.rows);
    for (int i = 0; i < probs.rows; ++i) {
        int best = 0;
        for (int j = 1; j < probs.cols; ++j)
            if (probs(i, j) > probs(i, best)) best = j;
        out[i] = best;
    }
    return out;
}

std::vector<ParamRef> ConsensusModel::ephysician_params() {
    std::vector<ParamRef> out;
    for (Mlp& e : ephysicians_)
        for (const ParamRef& p : e.params()) out.push_back(p);
    return out;
}

std::vector<ParamRef> ConsensusModel::discriminator_params() {
    return discriminator_.params();
}

std::vector<ParamRef> ConsensusModel::classifier_params() { return classifier_.params(); }

void ConsensusModel::zero_all_grads() {
    for (Mlp& e : ephysicians_) e.zero_grads();
    discriminator_.zero_grads();
    classifier_.zero_grads();
}

}  // namespace cn
