#pragma once

#include <cstddef>

#include "fanfold/graph.hpp"

namespace fanfold {

// n×k random-walk return probabilities: column t-1 holds diag(M^t) with
// M = D^-1 A (isolated nodes get a zero row in M). With `degree_column` an
// extra column deg(i) / max(1, n - 1) is appended.
struct StructuralEncoding {
    Tensor matrix;
    std::size_t steps = 0;
};

struct InitFeatures {
    Tensor matrix;
    std::size_t attr_dim = 0;
};

StructuralEncoding rw_structural_encoding(const Graph& g, std::size_t steps, bool degree_column = false);

// [X || X_struc], attribute columns first.
InitFeatures build_init_features(const Graph& g, const StructuralEncoding& se);

}  // namespace fanfold
