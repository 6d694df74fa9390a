#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cn/dataset.hpp"
#include "cn/partition.hpp"

namespace cn {

// Two-class generative model with a shared latent cause. Each sample draws a
// label, then a latent vector s ~ N(c_y, I) where the class means sit at
// +/- strength/2 per latent coordinate, and each modality observes
//   x_m = A_m s + noise_scale * eps,           eps ~ N(0, I)
// over its signal dimensions, followed by distractor dimensions that are
// pure N(0, 1) draws carrying no label information.
struct SyntheticSpec {
    int modalities = 3;
    int samples = 600;
    int latent_dim = 3;
    int signal_dims = 6;      // per modality
    int distractor_dims = 4;  // per modality
    double strength = 2.0;    // class-mean separation per latent coordinate
    double noise_scale = 1.0;
    double balance = 0.5;     // probability of class 1

    int dims_per_modality() const { return signal_dims + distractor_dims; }
    int total_dims() const { return modalities * dims_per_modality(); }
    void validate() const;
};

struct SyntheticData {
    Dataset dataset;
    std::vector<Matrix> loadings;  // per modality, signal_dims x latent_dim
    SyntheticSpec spec;
};

// Deterministic in the seed: loadings first, then per sample the label, the
// latent vector, and each modality's signal noise and distractors in order.
SyntheticData generate_synthetic(const SyntheticSpec& spec, uint64_t seed);

// Grouping by generating modality, named m1..mM.
ModalityPartition synthetic_partition(const SyntheticSpec& spec);
std::vector<std::pair<std::string, std::string>> synthetic_modality_map(const SyntheticSpec& spec);

// Accuracy of the exact Bayes rule for the generative model, estimated by
// Monte Carlo over fresh samples. The rule is linear: distractors carry no
// information and both classes share the covariance A A^T + noise^2 I over
// the signal dimensions, so the optimal boundary is the LDA discriminant
// with the exact population parameters.
double estimate_bayes_accuracy(const SyntheticData& data, int n_samples, uint64_t seed);

}  // namespace cn
