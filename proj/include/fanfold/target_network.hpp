#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fanfold/graph_flow.hpp"
#include "fanfold/random.hpp"
#include "fanfold/sample.hpp"
#include "fanfold/source_network.hpp"
#include "fanfold/tape.hpp"

namespace fanfold {

enum class DistanceKind { cosine, squared_euclidean };
enum class ReadoutKind { max, mean };
// GIN is the default student; GCN mirrors the source encoder for the
// symmetric ablation.
enum class TargetKind { gin, gcn };

struct GinLayer {
    Parameter w1, b1, w2, b2;
    double epsilon = 0.0;
};

// Per layer H <- MLP((1+ε)H + A H), MLP = relu(· W1 + b1) W2 + b2, with a relu
// between layers.
struct GinParams {
    std::vector<GinLayer> layers;

    static GinParams init(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim, std::size_t layer_count,
                          Rng& rng);
    std::size_t in_dim() const { return layers.front().w1.value.rows(); }
    std::size_t out_dim() const { return layers.back().w2.value.cols(); }
    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
};

struct TargetParams {
    TargetKind kind = TargetKind::gin;
    GinParams gin;
    GcnEncoderParams gcn;

    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
    std::size_t out_dim() const { return kind == TargetKind::gin ? gin.out_dim() : gcn.out_dim(); }
};

Var gin_forward(Tape& tape, GinParams& params, Var adjacency, Var x_init);
Var gin_forward(Tape& tape, const GinParams& params, Var adjacency, Var x_init);

// Node embeddings of either target kind. GIN consumes the raw adjacency, GCN
// the normalized one.
Var target_forward(Tape& tape, TargetParams& params, const GraphSample& s);
Var target_forward(Tape& tape, const TargetParams& params, const GraphSample& s);
Tensor target_embed(const TargetParams& params, const GraphSample& s);

Tensor readout_max(const Tensor& h);
Tensor readout(const Tensor& h, ReadoutKind kind);
Var readout(Tape& tape, Var h, ReadoutKind kind);

// Cosine: (1 - cos(u, v)) / 2 in [0, 1]; both zero -> 0, exactly one zero -> 0.5.
double distance(std::span<const double> u, std::span<const double> v, DistanceKind kind = DistanceKind::cosine);
// Row-wise distances, r×1.
Var distance_rows(Tape& tape, Var u, Var v, DistanceKind kind);

// One graph's outputs: node embeddings plus the pooled graph vector.
struct NetworkOutputs {
    Tensor nodes;
    Tensor graph;  // 1×d
};

// (1-β)·mean_G f(ȟ_G, ẑ_G) + β·mean_G mean_i f(ȟ_i, ẑ_i)
double target_loss(std::span<const NetworkOutputs> target, std::span<const NetworkOutputs> source, double beta,
                   DistanceKind kind = DistanceKind::cosine);
// Single-graph term on the tape.
Var target_loss(Tape& tape, Var target_nodes, Var target_graph, Var source_nodes, Var source_graph, double beta,
                DistanceKind kind);

struct TargetConfig {
    TargetKind kind = TargetKind::gin;
    std::size_t layers = 2;
    std::size_t hidden_dim = 16;
    double beta = 0.6;
    std::size_t epochs = 100;
    double learning_rate = 1e-3;
    std::size_t batch_size = 1;
    DistanceKind distance = DistanceKind::cosine;
    ReadoutKind readout = ReadoutKind::max;
};

// The frozen source side: encoder followed by the flow, or by the identity
// when `flow` is empty.
class SourceSide {
public:
    SourceSide(const FrozenEncoder& encoder, const FrozenFlow* flow) : encoder_(&encoder), flow_(flow) {}
    Tensor node_outputs(const GraphSample& s) const;
    std::size_t out_dim() const { return encoder_->embed_dim(); }

private:
    const FrozenEncoder* encoder_;
    const FrozenFlow* flow_;
};

struct TargetModel {
    TargetParams params;
    std::vector<double> loss_trace;
};

TargetModel train_target(const SourceSide& source, const TrainingSet& train, const TargetConfig& config,
                         std::uint64_t seed);

}  // namespace fanfold
