#include "fanfold/source_network.hpp"

#include "fanfold/errors.hpp"
#include "fanfold/training.hpp"

namespace fanfold {

GcnEncoderParams GcnEncoderParams::init(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim,
                                        std::size_t layers, Rng& rng) {
    if (layers == 0) throw ConfigError("GCN encoder needs at least one layer");
    GcnEncoderParams p;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t rows = l == 0 ? in_dim : hidden_dim;
        const std::size_t cols = l + 1 == layers ? out_dim : hidden_dim;
        p.weights.emplace_back("gcn.w" + std::to_string(l), glorot_init(rows, cols, rng));
    }
    return p;
}

std::vector<Parameter*> GcnEncoderParams::parameters() {
    std::vector<Parameter*> out;
    for (auto& w : weights) out.push_back(&w);
    return out;
}

std::vector<const Parameter*> GcnEncoderParams::parameters() const {
    std::vector<const Parameter*> out;
    for (const auto& w : weights) out.push_back(&w);
    return out;
}

FeatureDecoderParams FeatureDecoderParams::init(std::size_t embed_dim, std::size_t out_dim, Rng& rng) {
    FeatureDecoderParams p;
    p.w1 = Parameter("dec.w1", glorot_init(embed_dim, embed_dim, rng));
    p.b1 = Parameter("dec.b1", Tensor(1, embed_dim));
    p.w2 = Parameter("dec.w2", glorot_init(embed_dim, out_dim, rng));
    p.b2 = Parameter("dec.b2", Tensor(1, out_dim));
    return p;
}

std::vector<Parameter*> FeatureDecoderParams::parameters() { return {&w1, &b1, &w2, &b2}; }
std::vector<const Parameter*> FeatureDecoderParams::parameters() const { return {&w1, &b1, &w2, &b2}; }

namespace {

template <typename Params>
Var gcn_forward_impl(Tape& tape, Params& params, Var norm_adj, Var x_init) {
    if (params.weights.empty()) throw ContractError("GCN encoder has no layers");
    const Tensor& adj = tape.value(norm_adj);
    const Tensor& x = tape.value(x_init);
    if (adj.rows() != adj.cols() || adj.rows() != x.rows()) {
        throw ContractError("gcn_forward: adjacency " + adj.shape_string() + " does not match features " +
                            x.shape_string());
    }
    if (x.cols() != params.in_dim()) {
        throw ContractError("gcn_forward: feature width " + std::to_string(x.cols()) + " != encoder input " +
                            std::to_string(params.in_dim()));
    }
    Var h = x_init;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        h = tape.matmul(norm_adj, tape.matmul(h, bind(tape, params.weights[l])));
        if (l + 1 < params.weights.size()) h = tape.relu(h);
    }
    return h;
}

template <typename Params>
Var decode_impl(Tape& tape, Params& p, Var h) {
    Var hidden = tape.relu(tape.add_row(tape.matmul(h, bind(tape, p.w1)), bind(tape, p.b1)));
    return tape.add_row(tape.matmul(hidden, bind(tape, p.w2)), bind(tape, p.b2));
}

}  // namespace

Var gcn_forward(Tape& tape, GcnEncoderParams& params, Var norm_adj, Var x_init) {
    return gcn_forward_impl(tape, params, norm_adj, x_init);
}

Var gcn_forward(Tape& tape, const GcnEncoderParams& params, Var norm_adj, Var x_init) {
    return gcn_forward_impl(tape, params, norm_adj, x_init);
}

Tensor gcn_embed(const GcnEncoderParams& params, const Tensor& norm_adj, const Tensor& x_init) {
    Tape tape;
    Var h = gcn_forward(tape, params, tape.constant_ref(norm_adj), tape.constant_ref(x_init));
    return tape.value(h);
}

Var decode_features(Tape& tape, FeatureDecoderParams& params, Var h) { return decode_impl(tape, params, h); }
Var decode_features(Tape& tape, const FeatureDecoderParams& params, Var h) { return decode_impl(tape, params, h); }

Var adjacency_recon_loss(Tape& tape, Var h, Var adjacency) {
    const Tensor& a = tape.value(adjacency);
    const Tensor& hv = tape.value(h);
    if (a.rows() != hv.rows() || a.cols() != hv.rows()) {
        throw ContractError("adjacency_recon_loss: adjacency " + a.shape_string() + " vs embeddings " +
                            hv.shape_string());
    }
    Tensor complement(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) complement[i] = 1.0 - a[i];

    Var logits = tape.matmul(h, tape.transpose(h));
    Var prob = tape.clamp(tape.sigmoid(logits), kProbabilityFloor, 1.0 - kProbabilityFloor);
    Var log_p = tape.log(prob);
    Var log_q = tape.log(tape.add_scalar(tape.scale(prob, -1.0), 1.0));
    Var ll = tape.add(tape.mul(adjacency, log_p), tape.mul(tape.constant(std::move(complement)), log_q));
    return tape.scale(tape.sum(ll), -1.0);
}

Var source_loss(Tape& tape, Var h, Var adjacency, Var x_init, Var x_star, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1], got " + std::to_string(alpha));
    Var l1 = adjacency_recon_loss(tape, h, adjacency);
    Var diff = tape.sub(x_init, x_star);
    Var l2 = tape.sum(tape.mul(diff, diff));
    return tape.add(tape.scale(l1, 1.0 - alpha), tape.scale(l2, alpha));
}

SourceModel pretrain_source(const TrainingSet& train, const SourceConfig& config, std::uint64_t seed) {
    if (train.empty()) throw ConfigError("source pre-training needs at least one training graph");
    if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
        throw ConfigError("alpha must lie in [0, 1], got " + std::to_string(config.alpha));
    }
    const std::size_t in_dim = train.at(0).init_features.cols();
    Rng rng(seed);
    GcnEncoderParams encoder = GcnEncoderParams::init(in_dim, config.hidden_dim, config.embed_dim, config.layers, rng);
    FeatureDecoderParams decoder = FeatureDecoderParams::init(config.embed_dim, in_dim, rng);

    std::vector<Parameter*> params = encoder.parameters();
    for (Parameter* p : decoder.parameters()) params.push_back(p);

    const LoopConfig loop{config.epochs, config.batch_size, config.learning_rate, rng.next_u64()};
    auto loss = [&](Tape& tape, const GraphSample& s) {
        Var adj = tape.constant_ref(s.norm_adjacency);
        Var x = tape.constant_ref(s.init_features);
        Var h = gcn_forward(tape, encoder, adj, x);
        Var x_star = decode_features(tape, decoder, h);
        return source_loss(tape, h, tape.constant_ref(s.adjacency), x, x_star, config.alpha);
    };
    std::vector<double> trace = run_training_loop(train, loop, params, loss, "source");
    return SourceModel{FrozenEncoder(std::move(encoder)), std::move(decoder), std::move(trace)};
}

double source_loss_value(const SourceModel& model, const GraphSample& s, double alpha) {
    Tape tape;
    Var adj = tape.constant_ref(s.norm_adjacency);
    Var x = tape.constant_ref(s.init_features);
    Var h = gcn_forward(tape, model.encoder.params(), adj, x);
    Var x_star = decode_features(tape, model.decoder, h);
    return tape.scalar(source_loss(tape, h, tape.constant_ref(s.adjacency), x, x_star, alpha));
}

}  // namespace fanfold
