#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fanfold/tensor.hpp"

namespace fanfold {

// Undirected attributed graph. adjacency is a dense symmetric 0/1 matrix;
// features may have zero columns.
struct Graph {
    Tensor adjacency;
    Tensor features;
    int label = 0;

    std::size_t node_count() const { return adjacency.rows(); }
    std::size_t feature_dim() const { return features.cols(); }
    // Each undirected edge once; self-loops count once.
    std::size_t edge_count() const;
    std::vector<std::vector<std::size_t>> neighbors() const;
};

struct GraphSet {
    std::string name;
    std::vector<Graph> graphs;
    std::vector<int> label_vocabulary;  // sorted, unique

    std::size_t size() const { return graphs.size(); }
    std::size_t feature_dim() const { return graphs.empty() ? 0 : graphs.front().feature_dim(); }
    double average_nodes() const;
    double average_edges() const;
    std::size_t count_label(int label) const;
    // Most frequent label; ties go to the smaller label.
    int majority_label() const;
};

// Validates the Graph invariants (square symmetric 0/1 adjacency, matching
// feature rows, n >= 1). Throws ContractError.
void validate(const Graph& g);

// Normal-only training indices plus a mixed test set.
struct AnomalySplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::vector<std::uint8_t> test_is_anomaly;  // parallel to test
    int normal_class = 0;
    std::uint64_t seed = 0;

    std::size_t anomaly_count() const;
};

AnomalySplit make_anomaly_split(const GraphSet& set, int normal_class, double test_fraction, std::uint64_t seed);

// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
Tensor normalized_adjacency(const Graph& g);

// Relabels nodes: new node i is old node order[i].
Graph permute_nodes(const Graph& g, std::span<const std::size_t> order);

}  // namespace fanfold
