#include "fanfold/training.hpp"

#include <cmath>
#include <numeric>

#include "fanfold/errors.hpp"
#include "fanfold/random.hpp"

namespace fanfold {

std::vector<double> run_training_loop(const TrainingSet& data, const LoopConfig& config,
                                      std::vector<Parameter*> params, const SampleLoss& loss,
                                      const std::string& phase,
                                      const std::function<void(std::size_t)>& on_epoch_end) {
    if (data.empty()) throw ConfigError(phase + " training set is empty");
    if (config.batch_size == 0) throw ConfigError("batch_size must be positive");

    AdamState adam(AdamConfig{config.learning_rate});
    Rng rng(config.seed);
    std::vector<std::size_t> order(data.size());
    std::vector<double> trace;
    trace.reserve(config.epochs);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            const double weight = 1.0 / static_cast<double>(stop - start);
            zero_grads(params);
            for (std::size_t k = start; k < stop; ++k) {
                Tape tape;
                Var l = loss(tape, data.at(order[k]));
                const double value = tape.scalar(l);
                if (!std::isfinite(value)) throw TrainingFault(phase, epoch, "loss is " + std::to_string(value));
                total += value;
                try {
                    tape.backward(tape.scale(l, weight));
                } catch (const NumericFault& e) {
                    throw TrainingFault(phase, epoch, e.what());
                }
            }
            adam_step(params, adam);
        }
        trace.push_back(total / static_cast<double>(order.size()));
        if (on_epoch_end) on_epoch_end(epoch);
    }
    return trace;
}

}  // namespace fanfold
