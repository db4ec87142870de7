#include "fanfold/graph_flow.hpp"

#include <cmath>

#include "fanfold/errors.hpp"
#include "fanfold/training.hpp"

namespace fanfold {

MessagePassingNet MessagePassingNet::init(const std::string& name, std::size_t width, Rng& rng) {
    MessagePassingNet net;
    net.w_prop = Parameter(name + ".w_prop", glorot_init(width, width, rng));
    net.w_out = Parameter(name + ".w_out", Tensor(width, width));
    net.bias = Parameter(name + ".bias", Tensor(1, width));
    return net;
}

MessagePassingNet MessagePassingNet::zeros(const std::string& name, std::size_t width) {
    MessagePassingNet net;
    net.w_prop = Parameter(name + ".w_prop", Tensor(width, width));
    net.w_out = Parameter(name + ".w_out", Tensor(width, width));
    net.bias = Parameter(name + ".bias", Tensor(1, width));
    return net;
}

std::vector<Parameter*> CouplingStepParams::parameters() {
    std::vector<Parameter*> out;
    for (MessagePassingNet* net : {&f_scale, &f_shift, &g_scale, &g_shift}) {
        out.push_back(&net->w_prop);
        out.push_back(&net->w_out);
        out.push_back(&net->bias);
    }
    return out;
}

std::vector<const Parameter*> CouplingStepParams::parameters() const {
    std::vector<const Parameter*> out;
    for (const MessagePassingNet* net : {&f_scale, &f_shift, &g_scale, &g_shift}) {
        out.push_back(&net->w_prop);
        out.push_back(&net->w_out);
        out.push_back(&net->bias);
    }
    return out;
}

namespace {

std::size_t checked_half(std::size_t embed_dim, std::size_t step_count, double s_max) {
    if (embed_dim == 0 || embed_dim % 2 != 0) {
        throw ContractError("flow needs an even, positive embedding width, got " + std::to_string(embed_dim));
    }
    if (step_count == 0) throw ContractError("flow needs at least one coupling step");
    if (!(s_max > 0.0)) throw ContractError("flow scale clamp s_max must be positive");
    return embed_dim / 2;
}

CouplingStepParams make_step(std::size_t t, double s_max, auto&& make_net) {
    const std::string p = "flow.step" + std::to_string(t);
    CouplingStepParams step;
    step.f_scale = make_net(p + ".f_scale");
    step.f_shift = make_net(p + ".f_shift");
    step.g_scale = make_net(p + ".g_scale");
    step.g_shift = make_net(p + ".g_shift");
    step.s_max = s_max;
    return step;
}

}  // namespace

FlowParams FlowParams::init(std::size_t embed_dim, std::size_t step_count, double s_max, Rng& rng) {
    const std::size_t half = checked_half(embed_dim, step_count, s_max);
    FlowParams flow;
    for (std::size_t t = 0; t < step_count; ++t) {
        flow.steps.push_back(make_step(t, s_max, [&](const std::string& n) { return MessagePassingNet::init(n, half, rng); }));
    }
    return flow;
}

FlowParams FlowParams::identity(std::size_t embed_dim, std::size_t step_count, double s_max) {
    const std::size_t half = checked_half(embed_dim, step_count, s_max);
    FlowParams flow;
    for (std::size_t t = 0; t < step_count; ++t) {
        flow.steps.push_back(make_step(t, s_max, [&](const std::string& n) { return MessagePassingNet::zeros(n, half); }));
    }
    return flow;
}

FlowParams FlowParams::random(std::size_t embed_dim, std::size_t step_count, double s_max, Rng& rng, double scale) {
    FlowParams flow = identity(embed_dim, step_count, s_max);
    for (Parameter* p : flow.parameters())
        for (double& v : p->value.data()) v = scale * rng.uniform(-1.0, 1.0);
    return flow;
}

std::vector<Parameter*> FlowParams::parameters() {
    std::vector<Parameter*> out;
    for (auto& s : steps)
        for (Parameter* p : s.parameters()) out.push_back(p);
    return out;
}

std::vector<const Parameter*> FlowParams::parameters() const {
    std::vector<const Parameter*> out;
    for (const auto& s : steps)
        for (const Parameter* p : s.parameters()) out.push_back(p);
    return out;
}

namespace {

template <typename Net>
Var apply_net(Tape& tape, Net& net, Var h, Var norm_adj) {
    Var propagated = tape.matmul(norm_adj, tape.matmul(h, bind(tape, net.w_prop)));
    return tape.add_row(tape.matmul(propagated, bind(tape, net.w_out)), bind(tape, net.bias));
}

Var squash(Tape& tape, Var raw, double s_max) { return tape.scale(tape.tanh(tape.scale(raw, 1.0 / s_max)), s_max); }

template <typename Step>
FlowVars coupling_impl(Tape& tape, FlowVars state, Step& step, Var norm_adj) {
    const Tensor& h0 = tape.value(state.half0);
    const Tensor& h1 = tape.value(state.half1);
    if (!h0.same_shape(h1) || h0.cols() != step.f_scale.width()) {
        throw ContractError("coupling_forward: halves " + h0.shape_string() + " / " + h1.shape_string() +
                            " do not match step width " + std::to_string(step.f_scale.width()));
    }
    if (tape.value(norm_adj).rows() != h0.rows()) throw ContractError("coupling_forward: adjacency size mismatch");

    Var s_f = squash(tape, apply_net(tape, step.f_scale, state.half1, norm_adj), step.s_max);
    Var half0 = tape.add(tape.mul(state.half0, tape.exp(s_f)), apply_net(tape, step.f_shift, state.half1, norm_adj));
    Var s_g = squash(tape, apply_net(tape, step.g_scale, half0, norm_adj), step.s_max);
    Var half1 = tape.add(tape.mul(state.half1, tape.exp(s_g)), apply_net(tape, step.g_shift, half0, norm_adj));
    Var log_det = tape.add(state.log_det, tape.add(tape.sum(s_f), tape.sum(s_g)));
    return {half0, half1, log_det};
}

template <typename Flow>
FlowOutputVars flow_impl(Tape& tape, Var h, Flow& flow, Var norm_adj) {
    if (flow.steps.empty()) throw ContractError("flow has no coupling steps");
    const std::size_t d = tape.value(h).cols();
    if (d % 2 != 0) throw ContractError("flow_forward: embedding width " + std::to_string(d) + " is odd");
    if (d != flow.embed_dim()) {
        throw ContractError("flow_forward: embedding width " + std::to_string(d) + " != flow width " +
                            std::to_string(flow.embed_dim()));
    }
    FlowVars state{tape.slice_cols(h, 0, d / 2), tape.slice_cols(h, d / 2, d), tape.constant(Tensor(1, 1))};
    for (auto& step : flow.steps) state = coupling_impl(tape, state, step, norm_adj);
    return {tape.concat_cols(state.half0, state.half1), state.log_det};
}

Tensor apply_net_plain(const MessagePassingNet& net, const Tensor& h, const Tensor& norm_adj) {
    Tape tape;
    return tape.value(apply_net(tape, net, tape.constant_ref(h), tape.constant_ref(norm_adj)));
}

Tensor squash_plain(const Tensor& raw, double s_max) {
    Tensor out(raw.rows(), raw.cols());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = s_max * std::tanh(raw[i] / s_max);
    return out;
}

void require_finite(const Tensor& t, const char* where) {
    if (!t.all_finite()) throw NumericFault(std::string("non-finite value in ") + where);
}

}  // namespace

FlowVars coupling_forward(Tape& tape, FlowVars state, CouplingStepParams& step, Var norm_adj) {
    return coupling_impl(tape, state, step, norm_adj);
}

FlowVars coupling_forward(Tape& tape, FlowVars state, const CouplingStepParams& step, Var norm_adj) {
    return coupling_impl(tape, state, step, norm_adj);
}

FlowState coupling_forward(const FlowState& state, const CouplingStepParams& step, const Tensor& norm_adj) {
    Tape tape;
    FlowVars in{tape.constant_ref(state.half0), tape.constant_ref(state.half1), tape.constant(Tensor(1, 1, state.log_det))};
    FlowVars out = coupling_forward(tape, in, step, tape.constant_ref(norm_adj));
    FlowState result{tape.value(out.half0), tape.value(out.half1), tape.scalar(out.log_det)};
    require_finite(result.half0, "coupling_forward");
    require_finite(result.half1, "coupling_forward");
    if (!std::isfinite(result.log_det)) throw NumericFault("non-finite log-determinant in coupling_forward");
    return result;
}

FlowOutputVars flow_forward(Tape& tape, Var h, FlowParams& flow, Var norm_adj) {
    return flow_impl(tape, h, flow, norm_adj);
}

FlowOutputVars flow_forward(Tape& tape, Var h, const FlowParams& flow, Var norm_adj) {
    return flow_impl(tape, h, flow, norm_adj);
}

FlowResult flow_forward(const FlowParams& flow, const Tensor& h, const Tensor& norm_adj) {
    Tape tape;
    FlowOutputVars out = flow_forward(tape, tape.constant_ref(h), flow, tape.constant_ref(norm_adj));
    FlowResult result{tape.value(out.z), tape.scalar(out.log_det)};
    require_finite(result.z, "flow_forward");
    return result;
}

Tensor flow_inverse(const FlowParams& flow, const Tensor& z, const Tensor& norm_adj) {
    const std::size_t d = z.cols();
    if (d != flow.embed_dim()) {
        throw ContractError("flow_inverse: width " + std::to_string(d) + " != flow width " +
                            std::to_string(flow.embed_dim()));
    }
    if (norm_adj.rows() != z.rows()) throw ContractError("flow_inverse: adjacency size mismatch");
    Tensor half0 = slice_cols(z, 0, d / 2);
    Tensor half1 = slice_cols(z, d / 2, d);
    for (auto it = flow.steps.rbegin(); it != flow.steps.rend(); ++it) {
        const CouplingStepParams& step = *it;
        const Tensor s_g = squash_plain(apply_net_plain(step.g_scale, half0, norm_adj), step.s_max);
        const Tensor shift_g = apply_net_plain(step.g_shift, half0, norm_adj);
        for (std::size_t i = 0; i < half1.size(); ++i) half1[i] = (half1[i] - shift_g[i]) * std::exp(-s_g[i]);
        const Tensor s_f = squash_plain(apply_net_plain(step.f_scale, half1, norm_adj), step.s_max);
        const Tensor shift_f = apply_net_plain(step.f_shift, half1, norm_adj);
        for (std::size_t i = 0; i < half0.size(); ++i) half0[i] = (half0[i] - shift_f[i]) * std::exp(-s_f[i]);
        require_finite(half0, "flow_inverse");
        require_finite(half1, "flow_inverse");
    }
    return hconcat(half0, half1);
}

Var nf_loss(Tape& tape, Var z, Var log_det, std::size_t node_count) {
    if (node_count == 0) throw ContractError("nf_loss needs at least one node");
    Var energy = tape.scale(tape.sum(tape.mul(z, z)), 0.5);
    return tape.scale(tape.sub(energy, log_det), 1.0 / static_cast<double>(node_count));
}

double nf_loss_unnormalized(const Tensor& z, double log_det) { return 0.5 * frobenius_sq(z) - log_det; }

double nf_loss_value(const Tensor& z, double log_det, std::size_t node_count) {
    if (node_count == 0) throw ContractError("nf_loss needs at least one node");
    return nf_loss_unnormalized(z, log_det) / static_cast<double>(node_count);
}

FlowModel train_flow_on(const std::unordered_map<std::size_t, Tensor>& embeddings, const TrainingSet& train,
                        FlowParams init, const FlowConfig& config, std::uint64_t seed,
                        const std::function<void(std::size_t, const FlowParams&)>& snapshot) {
    FlowParams flow = std::move(init);
    const LoopConfig loop{config.epochs, config.batch_size, config.learning_rate, seed};
    auto loss = [&](Tape& tape, const GraphSample& s) {
        const auto it = embeddings.find(s.index);
        if (it == embeddings.end()) throw ContractError("no embedding cached for graph " + std::to_string(s.index));
        Var adj = tape.constant_ref(s.norm_adjacency);
        FlowOutputVars out = flow_forward(tape, tape.constant_ref(it->second), flow, adj);
        return nf_loss(tape, out.z, out.log_det, s.node_count());
    };
    std::function<void(std::size_t)> hook;
    if (snapshot) hook = [&](std::size_t epoch) { snapshot(epoch, flow); };
    std::vector<double> trace = run_training_loop(train, loop, flow.parameters(), loss, "flow", hook);
    return FlowModel{FrozenFlow(std::move(flow)), std::move(trace)};
}

FlowModel train_flow(const FrozenEncoder& encoder, const TrainingSet& train, const FlowConfig& config,
                     std::uint64_t seed, const std::function<void(std::size_t, const FlowParams&)>& snapshot) {
    if (train.empty()) throw ConfigError("flow training needs at least one training graph");
    // The encoder is frozen, so its embeddings are computed once.
    std::unordered_map<std::size_t, Tensor> embeddings;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const GraphSample& s = train.at(i);
        embeddings.emplace(s.index, encoder.embed(s));
    }
    Rng rng(seed);
    FlowParams init = FlowParams::init(encoder.embed_dim(), config.steps, config.s_max, rng);
    return train_flow_on(embeddings, train, std::move(init), config, rng.next_u64(), snapshot);
}

}  // namespace fanfold
