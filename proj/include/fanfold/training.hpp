#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fanfold/optim.hpp"
#include "fanfold/sample.hpp"
#include "fanfold/tape.hpp"

namespace fanfold {

struct LoopConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 1;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
};

using SampleLoss = std::function<Var(Tape&, const GraphSample&)>;

// Epoch loop shared by the three training phases: per epoch the graph order
// is reshuffled, each mini-batch averages its per-graph losses and takes one
// Adam step. Returns the mean loss of every epoch. A non-finite loss raises
// TrainingFault tagged with `phase` and the epoch.
std::vector<double> run_training_loop(const TrainingSet& data, const LoopConfig& config,
                                      std::vector<Parameter*> params, const SampleLoss& loss,
                                      const std::string& phase,
                                      const std::function<void(std::size_t)>& on_epoch_end = {});

// Records p as a trainable leaf.
inline Var bind(Tape& tape, Parameter& p) { return tape.param(p); }
// Records p as a constant (no gradient flows to it).
inline Var bind(Tape& tape, const Parameter& p) { return tape.constant_ref(p.value); }

}  // namespace fanfold
