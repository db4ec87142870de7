#pragma once

#include <cstdint>

#include "fanfold/graph.hpp"

namespace fanfold {

// Planted-anomaly benchmark. Normal graphs (label 0) have two dense
// communities joined by a few bridges; anomalies (label 1) are sparse
// Erdos-Renyi graphs of the same size range. No node attributes.
struct SyntheticSpec {
    std::size_t normal_count = 50;
    std::size_t anomaly_count = 10;
    std::size_t min_nodes = 12;
    std::size_t max_nodes = 20;
    double intra_prob = 0.7;
    double inter_prob = 0.05;
    double sparse_mean_degree = 2.0;
};

GraphSet make_planted_anomaly_set(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace fanfold
