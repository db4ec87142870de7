#include "fanfold/target_network.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "fanfold/errors.hpp"
#include "fanfold/training.hpp"

namespace fanfold {

GinParams GinParams::init(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim, std::size_t layer_count,
                          Rng& rng) {
    if (layer_count == 0) throw ConfigError("GIN needs at least one layer");
    GinParams p;
    for (std::size_t l = 0; l < layer_count; ++l) {
        const std::string n = "gin.l" + std::to_string(l);
        const std::size_t rows = l == 0 ? in_dim : hidden_dim;
        const std::size_t cols = l + 1 == layer_count ? out_dim : hidden_dim;
        GinLayer layer;
        layer.w1 = Parameter(n + ".w1", glorot_init(rows, hidden_dim, rng));
        layer.b1 = Parameter(n + ".b1", Tensor(1, hidden_dim));
        layer.w2 = Parameter(n + ".w2", glorot_init(hidden_dim, cols, rng));
        layer.b2 = Parameter(n + ".b2", Tensor(1, cols));
        p.layers.push_back(std::move(layer));
    }
    return p;
}

std::vector<Parameter*> GinParams::parameters() {
    std::vector<Parameter*> out;
    for (auto& l : layers) out.insert(out.end(), {&l.w1, &l.b1, &l.w2, &l.b2});
    return out;
}

std::vector<const Parameter*> GinParams::parameters() const {
    std::vector<const Parameter*> out;
    for (const auto& l : layers) out.insert(out.end(), {&l.w1, &l.b1, &l.w2, &l.b2});
    return out;
}

std::vector<Parameter*> TargetParams::parameters() {
    return kind == TargetKind::gin ? gin.parameters() : gcn.parameters();
}

std::vector<const Parameter*> TargetParams::parameters() const {
    return kind == TargetKind::gin ? gin.parameters() : gcn.parameters();
}

namespace {

template <typename Params>
Var gin_impl(Tape& tape, Params& params, Var adjacency, Var x_init) {
    if (params.layers.empty()) throw ContractError("GIN has no layers");
    const Tensor& a = tape.value(adjacency);
    const Tensor& x = tape.value(x_init);
    if (a.rows() != a.cols() || a.rows() != x.rows()) {
        throw ContractError("gin_forward: adjacency " + a.shape_string() + " does not match features " +
                            x.shape_string());
    }
    if (x.cols() != params.in_dim()) {
        throw ContractError("gin_forward: feature width " + std::to_string(x.cols()) + " != GIN input " +
                            std::to_string(params.in_dim()));
    }
    Var h = x_init;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& layer = params.layers[l];
        Var self = layer.epsilon == 0.0 ? h : tape.scale(h, 1.0 + layer.epsilon);
        Var agg = tape.add(self, tape.matmul(adjacency, h));
        Var hidden = tape.relu(tape.add_row(tape.matmul(agg, bind(tape, layer.w1)), bind(tape, layer.b1)));
        h = tape.add_row(tape.matmul(hidden, bind(tape, layer.w2)), bind(tape, layer.b2));
        if (l + 1 < params.layers.size()) h = tape.relu(h);
    }
    return h;
}

template <typename Params>
Var target_impl(Tape& tape, Params& params, const GraphSample& s) {
    Var x = tape.constant_ref(s.init_features);
    if (params.kind == TargetKind::gin) return gin_forward(tape, params.gin, tape.constant_ref(s.adjacency), x);
    return gcn_forward(tape, params.gcn, tape.constant_ref(s.norm_adjacency), x);
}

}  // namespace

Var gin_forward(Tape& tape, GinParams& params, Var adjacency, Var x_init) {
    return gin_impl(tape, params, adjacency, x_init);
}

Var gin_forward(Tape& tape, const GinParams& params, Var adjacency, Var x_init) {
    return gin_impl(tape, params, adjacency, x_init);
}

Var target_forward(Tape& tape, TargetParams& params, const GraphSample& s) { return target_impl(tape, params, s); }
Var target_forward(Tape& tape, const TargetParams& params, const GraphSample& s) {
    return target_impl(tape, params, s);
}

Tensor target_embed(const TargetParams& params, const GraphSample& s) {
    Tape tape;
    return tape.value(target_forward(tape, params, s));
}

Tensor readout_max(const Tensor& h) {
    if (h.rows() == 0) throw ContractError("readout over an empty graph");
    Tensor out(1, h.cols());
    for (std::size_t j = 0; j < h.cols(); ++j) {
        double best = h(0, j);
        for (std::size_t i = 1; i < h.rows(); ++i) best = std::max(best, h(i, j));
        out[j] = best;
    }
    return out;
}

Tensor readout(const Tensor& h, ReadoutKind kind) {
    if (kind == ReadoutKind::max) return readout_max(h);
    if (h.rows() == 0) throw ContractError("readout over an empty graph");
    Tensor out(1, h.cols());
    for (std::size_t i = 0; i < h.rows(); ++i)
        for (std::size_t j = 0; j < h.cols(); ++j) out[j] += h(i, j);
    for (double& v : out.data()) v /= static_cast<double>(h.rows());
    return out;
}

Var readout(Tape& tape, Var h, ReadoutKind kind) {
    if (kind == ReadoutKind::max) return tape.max_rows(h);
    const auto rows = tape.value(h).rows();
    if (rows == 0) throw ContractError("readout over an empty graph");
    return tape.scale(tape.sum_rows(h), 1.0 / static_cast<double>(rows));
}

double distance(std::span<const double> u, std::span<const double> v, DistanceKind kind) {
    if (u.size() != v.size()) throw ContractError("distance between vectors of different length");
    if (kind == DistanceKind::squared_euclidean) {
        double s = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) s += (u[j] - v[j]) * (u[j] - v[j]);
        return s;
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        dot += u[j] * v[j];
        nu += u[j] * u[j];
        nv += v[j] * v[j];
    }
    if (nu == 0.0 && nv == 0.0) return 0.0;
    if (nu == 0.0 || nv == 0.0) return 0.5;
    const double c = std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
    return 0.5 * (1.0 - c);
}

Var distance_rows(Tape& tape, Var u, Var v, DistanceKind kind) {
    if (kind == DistanceKind::cosine) return tape.cosine_distance_rows(u, v);
    Var diff = tape.sub(u, v);
    return tape.sum_cols(tape.mul(diff, diff));
}

Var target_loss(Tape& tape, Var target_nodes, Var target_graph, Var source_nodes, Var source_graph, double beta,
                DistanceKind kind) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1], got " + std::to_string(beta));
    const std::size_t n = tape.value(target_nodes).rows();
    if (tape.value(source_nodes).rows() != n) {
        throw ContractError("target_loss: node count mismatch (" + std::to_string(n) + " vs " +
                            std::to_string(tape.value(source_nodes).rows()) + ")");
    }
    Var graph_term = tape.sum(distance_rows(tape, target_graph, source_graph, kind));
    Var node_term = tape.scale(tape.sum(distance_rows(tape, target_nodes, source_nodes, kind)),
                               1.0 / static_cast<double>(n));
    return tape.add(tape.scale(graph_term, 1.0 - beta), tape.scale(node_term, beta));
}

double target_loss(std::span<const NetworkOutputs> target, std::span<const NetworkOutputs> source, double beta,
                   DistanceKind kind) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1], got " + std::to_string(beta));
    if (target.size() != source.size() || target.empty()) {
        throw ContractError("target_loss: need matching, non-empty graph lists");
    }
    double graph_sum = 0.0, node_sum = 0.0;
    for (std::size_t g = 0; g < target.size(); ++g) {
        const auto& t = target[g];
        const auto& s = source[g];
        if (t.nodes.rows() != s.nodes.rows()) throw ContractError("target_loss: node count mismatch");
        graph_sum += distance(t.graph.data(), s.graph.data(), kind);
        double nodes = 0.0;
        for (std::size_t i = 0; i < t.nodes.rows(); ++i) nodes += distance(t.nodes.row(i), s.nodes.row(i), kind);
        node_sum += nodes / static_cast<double>(t.nodes.rows());
    }
    const double m = static_cast<double>(target.size());
    return (1.0 - beta) * graph_sum / m + beta * node_sum / m;
}

Tensor SourceSide::node_outputs(const GraphSample& s) const {
    Tensor h = encoder_->embed(s);
    if (!flow_) return h;
    return flow_->apply(h, s.norm_adjacency).z;
}

TargetModel train_target(const SourceSide& source, const TrainingSet& train, const TargetConfig& config,
                         std::uint64_t seed) {
    if (train.empty()) throw ConfigError("target training needs at least one training graph");
    if (!(config.beta >= 0.0 && config.beta <= 1.0)) {
        throw ConfigError("beta must lie in [0, 1], got " + std::to_string(config.beta));
    }
    // Source outputs are fixed for the whole phase.
    std::unordered_map<std::size_t, NetworkOutputs> cached;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const GraphSample& s = train.at(i);
        Tensor nodes = source.node_outputs(s);
        Tensor graph = readout(nodes, config.readout);
        cached.emplace(s.index, NetworkOutputs{std::move(nodes), std::move(graph)});
    }

    const std::size_t in_dim = train.at(0).init_features.cols();
    Rng rng(seed);
    TargetParams params;
    params.kind = config.kind;
    if (config.kind == TargetKind::gin) {
        params.gin = GinParams::init(in_dim, config.hidden_dim, source.out_dim(), config.layers, rng);
    } else {
        params.gcn = GcnEncoderParams::init(in_dim, config.hidden_dim, source.out_dim(), config.layers, rng);
    }

    const LoopConfig loop{config.epochs, config.batch_size, config.learning_rate, rng.next_u64()};
    auto loss = [&](Tape& tape, const GraphSample& s) {
        const NetworkOutputs& src = cached.at(s.index);
        Var nodes = target_forward(tape, params, s);
        Var graph = readout(tape, nodes, config.readout);
        return target_loss(tape, nodes, graph, tape.constant_ref(src.nodes), tape.constant_ref(src.graph), config.beta,
                           config.distance);
    };
    std::vector<double> trace = run_training_loop(train, loop, params.parameters(), loss, "target");
    return TargetModel{std::move(params), std::move(trace)};
}

}  // namespace fanfold
