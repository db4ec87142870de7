#include "fanfold/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fanfold/errors.hpp"
#include "fanfold/random.hpp"

namespace fanfold {

std::size_t Graph::edge_count() const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < node_count(); ++i)
        for (std::size_t j = i; j < node_count(); ++j)
            if (adjacency(i, j) != 0.0) ++count;
    return count;
}

std::vector<std::vector<std::size_t>> Graph::neighbors() const {
    std::vector<std::vector<std::size_t>> out(node_count());
    for (std::size_t i = 0; i < node_count(); ++i)
        for (std::size_t j = 0; j < node_count(); ++j)
            if (adjacency(i, j) != 0.0) out[i].push_back(j);
    return out;
}

double GraphSet::average_nodes() const {
    if (graphs.empty()) return 0.0;
    double total = 0.0;
    for (const auto& g : graphs) total += static_cast<double>(g.node_count());
    return total / static_cast<double>(graphs.size());
}

double GraphSet::average_edges() const {
    if (graphs.empty()) return 0.0;
    double total = 0.0;
    for (const auto& g : graphs) total += static_cast<double>(g.edge_count());
    return total / static_cast<double>(graphs.size());
}

std::size_t GraphSet::count_label(int label) const {
    return static_cast<std::size_t>(
        std::count_if(graphs.begin(), graphs.end(), [label](const Graph& g) { return g.label == label; }));
}

int GraphSet::majority_label() const {
    if (graphs.empty()) throw ContractError("majority_label on empty GraphSet");
    std::map<int, std::size_t> counts;
    for (const auto& g : graphs) ++counts[g.label];
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
        if (it->second > best->second) best = it;
    return best->first;
}

void validate(const Graph& g) {
    const std::size_t n = g.adjacency.rows();
    if (n == 0) throw ContractError("graph must have at least one node");
    if (g.adjacency.cols() != n) throw ContractError("adjacency must be square, got " + g.adjacency.shape_string());
    if (g.features.rows() != n) {
        throw ContractError("feature rows " + std::to_string(g.features.rows()) + " != node count " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = g.adjacency(i, j);
            if (v != 0.0 && v != 1.0) throw ContractError("adjacency entries must be 0 or 1");
            if (v != g.adjacency(j, i)) throw ContractError("adjacency must be symmetric");
        }
    }
}

std::size_t AnomalySplit::anomaly_count() const {
    return static_cast<std::size_t>(std::count(test_is_anomaly.begin(), test_is_anomaly.end(), std::uint8_t{1}));
}

AnomalySplit make_anomaly_split(const GraphSet& set, int normal_class, double test_fraction, std::uint64_t seed) {
    if (!std::binary_search(set.label_vocabulary.begin(), set.label_vocabulary.end(), normal_class)) {
        throw ConfigError("normal_class " + std::to_string(normal_class) + " does not occur in dataset '" + set.name +
                          "'");
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("test_fraction must lie in (0, 1), got " + std::to_string(test_fraction));
    }

    std::vector<std::size_t> normals;
    std::vector<std::size_t> anomalies;
    for (std::size_t i = 0; i < set.graphs.size(); ++i) {
        (set.graphs[i].label == normal_class ? normals : anomalies).push_back(i);
    }

    Rng rng(seed);
    rng.shuffle(normals);
    const auto held_out = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(normals.size())));
    if (held_out >= normals.size()) {
        throw ConfigError("anomaly split leaves no normal graphs for training (" + std::to_string(normals.size()) +
                          " normals, test_fraction " + std::to_string(test_fraction) + ")");
    }

    AnomalySplit split;
    split.normal_class = normal_class;
    split.seed = seed;
    split.train.assign(normals.begin() + static_cast<std::ptrdiff_t>(held_out), normals.end());
    std::sort(split.train.begin(), split.train.end());

    std::vector<std::pair<std::size_t, std::uint8_t>> test;
    for (std::size_t k = 0; k < held_out; ++k) test.emplace_back(normals[k], 0);
    for (std::size_t idx : anomalies) test.emplace_back(idx, 1);
    std::sort(test.begin(), test.end());
    for (const auto& [idx, flag] : test) {
        split.test.push_back(idx);
        split.test_is_anomaly.push_back(flag);
    }
    return split;
}

Tensor normalized_adjacency(const Graph& g) {
    const std::size_t n = g.node_count();
    Tensor out = g.adjacency;
    for (std::size_t i = 0; i < n; ++i) out(i, i) += 1.0;
    std::vector<double> inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < n; ++j) deg += out(i, j);
        inv_sqrt[i] = 1.0 / std::sqrt(deg);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) *= inv_sqrt[i] * inv_sqrt[j];
    return out;
}

Graph permute_nodes(const Graph& g, std::span<const std::size_t> order) {
    const std::size_t n = g.node_count();
    if (order.size() != n) throw ContractError("permutation length does not match node count");
    Graph out;
    out.label = g.label;
    out.adjacency = Tensor(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.adjacency(i, j) = g.adjacency(order[i], order[j]);
    out.features = select_rows(g.features, order);
    return out;
}

}  // namespace fanfold
