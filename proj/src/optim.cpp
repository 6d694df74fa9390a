#include "cn/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "cn/kernels.hpp"

namespace cn {

void Adam::step(const std::vector<ParamRef>& params, double grad_scale) {
    if (first_moment_.empty()) {
        for (const ParamRef& p : params) {
            first_moment_.emplace_back(p.value->rows, p.value->cols);
            second_moment_.emplace_back(p.value->rows, p.value->cols);
        }
    }
    if (params.size() != first_moment_.size())
        throw std::invalid_argument("Adam::step: parameter list changed size");

    for (const ParamRef& p : params)
        if (!p.grad->all_finite())
            throw std::runtime_error("Adam::step: non-finite gradient");

    ++step_count_;
    const double bias_corr1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double bias_corr2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));

    for (size_t i = 0; i < params.size(); ++i) {
        if (!params[i].value->same_shape(first_moment_[i]))
            throw std::invalid_argument("Adam::step: parameter shape changed");
        kernels::adam_update(*params[i].value, *params[i].grad, first_moment_[i],
                             second_moment_[i], cfg_.lr, cfg_.beta1, cfg_.beta2,
                             cfg_.epsilon, bias_corr1, bias_corr2, grad_scale);
    }
}

}  // namespace cn
