#include "fanfold/synthetic.hpp"

#include "fanfold/errors.hpp"
#include "fanfold/random.hpp"

namespace fanfold {

namespace {

void link(Tensor& a, std::size_t i, std::size_t j) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
}

Graph community_graph(std::size_t n, const SyntheticSpec& spec, Rng& rng) {
    Graph g;
    g.adjacency = Tensor(n, n);
    g.features = Tensor(n, 0);
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool same = (i < half) == (j < half);
            if (rng.uniform() < (same ? spec.intra_prob : spec.inter_prob)) link(g.adjacency, i, j);
        }
    }
    // one guaranteed bridge and a spanning path per community keep it connected
    link(g.adjacency, 0, half);
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (i + 1 != half) link(g.adjacency, i, i + 1);
    return g;
}

Graph sparse_graph(std::size_t n, const SyntheticSpec& spec, Rng& rng) {
    Graph g;
    g.adjacency = Tensor(n, n);
    g.features = Tensor(n, 0);
    const double p = spec.sparse_mean_degree / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.uniform() < p) link(g.adjacency, i, j);
    return g;
}

}  // namespace

GraphSet make_planted_anomaly_set(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.min_nodes < 4 || spec.max_nodes < spec.min_nodes) throw ConfigError("synthetic: bad node-count range");
    if (spec.normal_count == 0 || spec.anomaly_count == 0) throw ConfigError("synthetic: both classes need graphs");
    Rng rng(seed);
    GraphSet set;
    set.name = "PLANTED";
    const std::size_t total = spec.normal_count + spec.anomaly_count;
    // interleave so the classes are not contiguous in the file
    std::vector<int> labels(spec.normal_count, 0);
    labels.insert(labels.end(), spec.anomaly_count, 1);
    rng.shuffle(labels);
    for (std::size_t k = 0; k < total; ++k) {
        const std::size_t n = spec.min_nodes + rng.below(spec.max_nodes - spec.min_nodes + 1);
        Graph g = labels[k] == 0 ? community_graph(n, spec, rng) : sparse_graph(n, spec, rng);
        g.label = labels[k];
        set.graphs.push_back(std::move(g));
    }
    set.label_vocabulary = {0, 1};
    return set;
}

}  // namespace fanfold
