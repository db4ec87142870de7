#pragma once

#include <cstddef>
#include <set>
#include <vector>

#include "fanfold/graph.hpp"

namespace fanfold {

// Per-graph tensors shared by every network: raw adjacency, the GCN
// propagation operator and X_init. Built once per (dataset, k_se).
struct GraphSample {
    std::size_t index = 0;  // position in the GraphSet
    Tensor adjacency;
    Tensor norm_adjacency;
    Tensor init_features;

    std::size_t node_count() const { return adjacency.rows(); }
};

GraphSample prepare_sample(const Graph& g, std::size_t index, std::size_t k_se, bool degree_column = false);
std::vector<GraphSample> prepare_samples(const GraphSet& set, std::size_t k_se, bool degree_column = false);

// Records every graph index a trainer touches so the run can prove that no
// test graph was used for fitting.
class SplitGuard {
public:
    void record(std::size_t index) { seen_.insert(index); }
    const std::set<std::size_t>& seen() const { return seen_; }
    // Throws ContractError naming the first index that is not a training index.
    void verify(const AnomalySplit& split) const;

private:
    std::set<std::size_t> seen_;
};

// The graphs a trainer may see. Every access goes through at(), which
// reports to the guard.
class TrainingSet {
public:
    TrainingSet() = default;
    TrainingSet(std::vector<const GraphSample*> samples, SplitGuard* guard = nullptr)
        : samples_(std::move(samples)), guard_(guard) {}

    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    const GraphSample& at(std::size_t i) const {
        const GraphSample& s = *samples_.at(i);
        if (guard_) guard_->record(s.index);
        return s;
    }

private:
    std::vector<const GraphSample*> samples_;
    SplitGuard* guard_ = nullptr;
};

TrainingSet make_training_set(const std::vector<GraphSample>& samples, const std::vector<std::size_t>& indices,
                              SplitGuard* guard = nullptr);

}  // namespace fanfold
