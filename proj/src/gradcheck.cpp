#include "fanfold/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fanfold/errors.hpp"
#include "fanfold/optim.hpp"

namespace fanfold {

double evaluate_loss(const LossBuilder& fn) {
    Tape tape;
    return tape.scalar(fn(tape));
}

double gradcheck(const LossBuilder& fn, std::span<Parameter* const> inputs, double step) {
    if (!(step >= 1e-7 && step <= 1e-3)) {
        throw ContractError("gradcheck step must lie in [1e-7, 1e-3], got " + std::to_string(step));
    }
    zero_grads(inputs);
    double base = 0.0;
    {
        Tape tape;
        Var loss = fn(tape);
        base = tape.scalar(loss);
        tape.backward(loss);
    }
    if (evaluate_loss(fn) != base) throw DeterminismError("gradcheck: loss function is not deterministic");

    std::vector<Tensor> analytic;
    analytic.reserve(inputs.size());
    for (const Parameter* p : inputs) analytic.push_back(p->grad);

    double worst = 0.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        Parameter& p = *inputs[k];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double saved = p.value[i];
            p.value[i] = saved + step;
            const double up = evaluate_loss(fn);
            p.value[i] = saved - step;
            const double down = evaluate_loss(fn);
            p.value[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double a = analytic[k][i];
            const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
            worst = std::max(worst, std::abs(a - numeric) / denom);
        }
    }
    return worst;
}

}  // namespace fanfold
