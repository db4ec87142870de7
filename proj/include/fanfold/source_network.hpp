#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fanfold/random.hpp"
#include "fanfold/sample.hpp"
#include "fanfold/tape.hpp"

namespace fanfold {

struct SourceConfig {
    std::size_t layers = 2;
    std::size_t hidden_dim = 16;
    std::size_t embed_dim = 16;
    double alpha = 0.7;
    std::size_t epochs = 100;
    double learning_rate = 1e-3;
    std::size_t batch_size = 1;
};

// W_1 (d_in×hidden), ..., W_k (hidden×d). No biases.
struct GcnEncoderParams {
    std::vector<Parameter> weights;

    static GcnEncoderParams init(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim, std::size_t layers,
                                 Rng& rng);
    std::size_t in_dim() const { return weights.front().value.rows(); }
    std::size_t out_dim() const { return weights.back().value.cols(); }
    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
};

// Two-layer perceptron d -> d -> d_init with a relu hidden layer.
struct FeatureDecoderParams {
    Parameter w1, b1, w2, b2;

    static FeatureDecoderParams init(std::size_t embed_dim, std::size_t out_dim, Rng& rng);
    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
};

// H = layer_k(...layer_1(X)...), layer(H) = relu(Â H W) except the last,
// which is linear.
Var gcn_forward(Tape& tape, GcnEncoderParams& params, Var norm_adj, Var x_init);
Var gcn_forward(Tape& tape, const GcnEncoderParams& params, Var norm_adj, Var x_init);
Tensor gcn_embed(const GcnEncoderParams& params, const Tensor& norm_adj, const Tensor& x_init);

Var decode_features(Tape& tape, FeatureDecoderParams& params, Var h);
Var decode_features(Tape& tape, const FeatureDecoderParams& params, Var h);

inline constexpr double kProbabilityFloor = 1e-12;

// -Σ_ij [A log σ(h_i·h_j) + (1-A) log(1-σ(h_i·h_j))] over the full n×n
// matrix, probabilities clamped to [1e-12, 1-1e-12].
Var adjacency_recon_loss(Tape& tape, Var h, Var adjacency);

// (1-α)·L_adj + α·‖X_init - X*‖²_F. Throws ConfigError for α ∉ [0,1].
Var source_loss(Tape& tape, Var h, Var adjacency, Var x_init, Var x_star, double alpha);

// Pre-trained encoder; no mutable access to its parameters exists.
class FrozenEncoder {
public:
    FrozenEncoder() = default;
    explicit FrozenEncoder(GcnEncoderParams params) : params_(std::move(params)) {}

    const GcnEncoderParams& params() const { return params_; }
    Tensor embed(const GraphSample& s) const { return gcn_embed(params_, s.norm_adjacency, s.init_features); }
    std::size_t embed_dim() const { return params_.out_dim(); }

private:
    GcnEncoderParams params_;
};

struct SourceModel {
    FrozenEncoder encoder;
    FeatureDecoderParams decoder;
    std::vector<double> loss_trace;
};

// Initialization draws from `seed`; the epoch shuffles use a derived stream.
SourceModel pretrain_source(const TrainingSet& train, const SourceConfig& config, std::uint64_t seed);

// L_source of one graph under a trained model (reconstruction-error score).
double source_loss_value(const SourceModel& model, const GraphSample& s, double alpha);

}  // namespace fanfold
