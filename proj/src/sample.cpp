#include "fanfold/sample.hpp"

#include <algorithm>

#include "fanfold/errors.hpp"
#include "fanfold/features.hpp"

namespace fanfold {

GraphSample prepare_sample(const Graph& g, std::size_t index, std::size_t k_se, bool degree_column) {
    GraphSample s;
    s.index = index;
    s.adjacency = g.adjacency;
    s.norm_adjacency = normalized_adjacency(g);
    s.init_features = build_init_features(g, rw_structural_encoding(g, k_se, degree_column)).matrix;
    return s;
}

std::vector<GraphSample> prepare_samples(const GraphSet& set, std::size_t k_se, bool degree_column) {
    std::vector<GraphSample> out;
    out.reserve(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) out.push_back(prepare_sample(set.graphs[i], i, k_se, degree_column));
    return out;
}

void SplitGuard::verify(const AnomalySplit& split) const {
    for (std::size_t idx : seen_) {
        if (!std::binary_search(split.train.begin(), split.train.end(), idx)) {
            const bool in_test = std::find(split.test.begin(), split.test.end(), idx) != split.test.end();
            throw ContractError("protocol violation: graph " + std::to_string(idx) + " reached a trainer but is " +
                                (in_test ? "a test graph" : "not a training graph"));
        }
    }
}

TrainingSet make_training_set(const std::vector<GraphSample>& samples, const std::vector<std::size_t>& indices,
                              SplitGuard* guard) {
    std::vector<const GraphSample*> picked;
    picked.reserve(indices.size());
    for (std::size_t idx : indices) {
        if (idx >= samples.size()) throw ContractError("training index " + std::to_string(idx) + " out of range");
        picked.push_back(&samples[idx]);
    }
    return TrainingSet(std::move(picked), guard);
}

}  // namespace fanfold
