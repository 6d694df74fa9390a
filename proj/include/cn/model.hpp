#pragma once

#include <vector>

#include "cn/layers.hpp"
#include "cn/matrix.hpp"
#include "cn/partition.hpp"
#include "cn/rng.hpp"

namespace cn {

struct ModelConfig {
    int hidden_dim = 10;  // ePhysician hidden layer width
    int rep_dim = 10;     // representation (interpretation vector) width
    double leaky_slope = 0.01;
    double bn_epsilon = 1e-5;
    double bn_momentum = 0.1;
    bool noise_enabled = true;
};

// The consensus network: one encoder ("ePhysician") per modality mapping its
// feature subset to a shared-width representation, a single-dense-layer
// discriminator that predicts which modality a representation came from, and
// a single-dense-layer classifier over the concatenated representations.
//
// Every ePhysician is dense(d_m -> hidden) -> batchnorm -> leaky ReLU ->
// dense(hidden -> rep_dim), the same width for every modality.
//
// With the noise modality enabled the discriminator has M+1 classes: class 0
// is the sampled Gaussian noise block, real modalities are classes 1..M. The
// noise block never reaches the classifier.
class ConsensusModel {
public:
    // Parameters start at zero; call init() before training.
    ConsensusModel(ModalityPartition partition, int n_classes, ModelConfig cfg = {});

    // Initialization order: ePhysicians in group order, then the classifier,
    // then the discriminator. The classifier path therefore consumes the
    // same draws whether or not the noise modality is enabled.
    void init(Rng& rng);

    int modality_count() const { return partition_.group_count(); }
    int rep_dim() const { return cfg_.rep_dim; }
    int n_classes() const { return n_classes_; }
    int disc_class_count() const;
    const ModalityPartition& partition() const { return partition_; }
    const ModelConfig& config() const { return cfg_; }

    // i_m = f_m(x_m) in group order; x is the full [B x total_dims] batch.
    std::vector<Matrix> encode_all(const Matrix& x, bool training,
                                   bool update_running = true);

    // One Gaussian noise row per batch sample. Mean and variance are
    // per-dimension statistics pooled over all M*B representation rows;
    // the sample is data, no gradient flows back through the statistics.
    Matrix sample_noise(const std::vector<Matrix>& reps, Rng& rng) const;

    // Cross-entropy of the discriminator predicting the originating modality,
    // averaged uniformly over modalities (and the noise block when given)
    // and over the batch. noise must be non-null iff the noise modality is
    // enabled.
    double discriminator_loss(const std::vector<Matrix>& reps, const Matrix* noise);
    // Same, but also accumulates gradients: always into the discriminator's
    // parameter grads, and through the cached encode_all forward into the
    // ePhysicians when requested.
    double discriminator_loss_backward(const std::vector<Matrix>& reps,
                                       const Matrix* noise, bool into_ephysicians);

    // Cross-entropy of the classifier on concatenated real-modality
    // representations.
    double classifier_loss(const std::vector<Matrix>& reps,
                           const std::vector<int>& labels);
    // Gradients always reach the classifier; they propagate into the
    // ePhysicians only when into_ephysicians is set (cooperative mode).
    double classifier_loss_backward(const std::vector<Matrix>& reps,
                                    const std::vector<int>& labels,
                                    bool into_ephysicians);

    Matrix class_probabilities(const Matrix& x);  // inference mode
    std::vector<int> predict(const Matrix& x);    // argmax; ties -> lowest index

    std::vector<ParamRef> ephysician_params();
    std::vector<ParamRef> discriminator_params();
    std::vector<ParamRef> classifier_params();
    void zero_all_grads();

    std::vector<Mlp>& ephysicians() { return ephysicians_; }
    Mlp& discriminator() { return discriminator_; }
    Mlp& classifier() { return classifier_; }

    static Matrix concat_reps(const std::vector<Matrix>& reps);

private:
    Matrix stack_disc_input(const std::vector<Matrix>& reps, const Matrix* noise,
                            std::vector<int>& labels_out) const;

    ModalityPartition partition_;
    ModelConfig cfg_;
    int n_classes_;
    std::vector<Mlp> ephysicians_;
    Mlp discriminator_;
    Mlp classifier_;
};

}  // namespace cn
