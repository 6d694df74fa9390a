#pragma once

#include <vector>

#include "cn/layers.hpp"
#include "cn/matrix.hpp"

namespace cn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Adam with bias correction over a fixed list of parameters. Moment arrays
// are allocated on the first step and must see the same shapes afterwards.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    // Applies one update using the gradients stored in the refs. grad_scale
    // of -1 turns the step into gradient ascent. Throws on non-finite
    // gradients; the step count increments by exactly 1 per call.
    void step(const std::vector<ParamRef>& params, double grad_scale = 1.0);

    long step_count() const { return step_count_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    long step_count_ = 0;
    std::vector<Matrix> first_moment_;
    std::vector<Matrix> second_moment_;
};

}  // namespace cn
