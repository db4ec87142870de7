#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "fanfold/random.hpp"
#include "fanfold/sample.hpp"
#include "fanfold/source_network.hpp"
#include "fanfold/tape.hpp"

namespace fanfold {

// One message-passing sub-network: (Â H W_prop) W_out + b, width d/2 -> d/2.
struct MessagePassingNet {
    Parameter w_prop, w_out, bias;

    static MessagePassingNet init(const std::string& name, std::size_t width, Rng& rng);
    static MessagePassingNet zeros(const std::string& name, std::size_t width);
    std::size_t width() const { return w_prop.value.rows(); }
};

// Affine coupling step. F acts on half0 conditioned on half1, G on half1
// conditioned on the updated half0. Raw scales are squashed to
// s_max·tanh(raw / s_max).
struct CouplingStepParams {
    MessagePassingNet f_scale, f_shift, g_scale, g_shift;
    double s_max = 2.0;

    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
};

struct FlowParams {
    std::vector<CouplingStepParams> steps;

    // Propagation weights are Glorot; output maps start at zero so the
    // untrained flow is the identity.
    static FlowParams init(std::size_t embed_dim, std::size_t step_count, double s_max, Rng& rng);
    // Every sub-network identically zero.
    static FlowParams identity(std::size_t embed_dim, std::size_t step_count, double s_max = 2.0);
    // Every weight random (used by property tests).
    static FlowParams random(std::size_t embed_dim, std::size_t step_count, double s_max, Rng& rng, double scale = 1.0);

    std::size_t half_dim() const { return steps.front().f_scale.width(); }
    std::size_t embed_dim() const { return 2 * half_dim(); }
    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
};

struct FlowVars {
    Var half0, half1, log_det;
};

struct FlowOutputVars {
    Var z, log_det;
};

struct FlowState {
    Tensor half0, half1;
    double log_det = 0.0;
};

struct FlowResult {
    Tensor z;
    double log_det = 0.0;
};

FlowVars coupling_forward(Tape& tape, FlowVars state, CouplingStepParams& step, Var norm_adj);
FlowVars coupling_forward(Tape& tape, FlowVars state, const CouplingStepParams& step, Var norm_adj);
FlowState coupling_forward(const FlowState& state, const CouplingStepParams& step, const Tensor& norm_adj);

FlowOutputVars flow_forward(Tape& tape, Var h, FlowParams& flow, Var norm_adj);
FlowOutputVars flow_forward(Tape& tape, Var h, const FlowParams& flow, Var norm_adj);
FlowResult flow_forward(const FlowParams& flow, const Tensor& h, const Tensor& norm_adj);

Tensor flow_inverse(const FlowParams& flow, const Tensor& z, const Tensor& norm_adj);

// (‖Z‖²/2 - log_det) / n
Var nf_loss(Tape& tape, Var z, Var log_det, std::size_t node_count);
double nf_loss_value(const Tensor& z, double log_det, std::size_t node_count);
// ‖Z‖²/2 - log_det
double nf_loss_unnormalized(const Tensor& z, double log_det);

struct FlowConfig {
    std::size_t steps = 2;
    double s_max = 2.0;
    std::size_t epochs = 100;
    double learning_rate = 1e-3;
    std::size_t batch_size = 1;
};

class FrozenFlow {
public:
    FrozenFlow() = default;
    explicit FrozenFlow(FlowParams params) : params_(std::move(params)) {}
    const FlowParams& params() const { return params_; }
    FlowResult apply(const Tensor& h, const Tensor& norm_adj) const { return flow_forward(params_, h, norm_adj); }

private:
    FlowParams params_;
};

struct FlowModel {
    FrozenFlow flow;
    std::vector<double> loss_trace;
};

// Fits the flow on frozen encoder embeddings. Only flow parameters receive
// gradients. `snapshot`, when set, is called with the current parameters
// after every epoch.
FlowModel train_flow(const FrozenEncoder& encoder, const TrainingSet& train, const FlowConfig& config,
                     std::uint64_t seed,
                     const std::function<void(std::size_t, const FlowParams&)>& snapshot = {});

// Same loop starting from caller-provided parameters; fits fixed embeddings
// keyed by graph index.
FlowModel train_flow_on(const std::unordered_map<std::size_t, Tensor>& embeddings, const TrainingSet& train, FlowParams init,
                        const FlowConfig& config, std::uint64_t seed,
                        const std::function<void(std::size_t, const FlowParams&)>& snapshot = {});

}  // namespace fanfold
