#include "fanfold/optim.hpp"

#include <cmath>

#include "fanfold/errors.hpp"

namespace fanfold {

void adam_step(std::span<Parameter* const> params, AdamState& state) {
    if (state.first_moment.empty() && state.step_count == 0) {
        for (const Parameter* p : params) {
            state.first_moment.emplace_back(p->value.rows(), p->value.cols());
            state.second_moment.emplace_back(p->value.rows(), p->value.cols());
        }
    }
    if (state.first_moment.size() != params.size()) {
        throw ContractError("adam_step: optimizer state tracks " + std::to_string(state.first_moment.size()) +
                            " parameters, got " + std::to_string(params.size()));
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        const Parameter& p = *params[k];
        if (!p.grad.same_shape(p.value) || !state.first_moment[k].same_shape(p.value)) {
            throw ContractError("adam_step: shape mismatch for parameter '" + p.name + "' (" + p.value.shape_string() +
                                ", grad " + p.grad.shape_string() + ", state " + state.first_moment[k].shape_string() +
                                ")");
        }
    }

    const AdamConfig& c = state.config;
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bias1 = 1.0 - std::pow(c.beta1, t);
    const double bias2 = 1.0 - std::pow(c.beta2, t);

    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter& p = *params[k];
        Tensor& m = state.first_moment[k];
        Tensor& v = state.second_moment[k];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad[i];
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
            const double m_hat = m[i] / bias1;
            const double v_hat = v[i] / bias2;
            p.value[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
        }
    }
}

void zero_grads(std::span<Parameter* const> params) {
    for (Parameter* p : params) p->zero_grad();
}

}  // namespace fanfold
