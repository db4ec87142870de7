#pragma once

#include <functional>
#include <span>

#include "fanfold/tape.hpp"

namespace fanfold {

// Builds a scalar loss on the given tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

// Compares reverse-mode gradients against central differences over every
// coordinate of `inputs`. Returns the max of
// |analytic - numeric| / max(1, |analytic|, |numeric|).
// Throws DeterminismError if two evaluations at the same point disagree.
double gradcheck(const LossBuilder& fn, std::span<Parameter* const> inputs, double step = 1e-5);

// Forward value only.
double evaluate_loss(const LossBuilder& fn);

}  // namespace fanfold
