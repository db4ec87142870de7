#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fanfold/tensor.hpp"

namespace fanfold {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Moment buffers are created lazily on the first step and must keep the
// parameter shapes afterwards.
struct AdamState {
    AdamConfig config;
    std::vector<Tensor> first_moment;
    std::vector<Tensor> second_moment;
    std::size_t step_count = 0;

    explicit AdamState(AdamConfig c = {}) : config(c) {}
};

// Bias-corrected adaptive-moment update from each parameter's grad buffer.
void adam_step(std::span<Parameter* const> params, AdamState& state);

void zero_grads(std::span<Parameter* const> params);

}  // namespace fanfold
