#include <doctest.h>

#include <cmath>

#include "fanfold/errors.hpp"
#include "fanfold/graph_flow.hpp"
#include "fanfold/source_network.hpp"
#include "fanfold/target_network.hpp"
#include "suites.hpp"

using namespace fanfold;
using namespace fanfold::testing;

namespace {

Tensor relu_oracle(Tensor t) {
    for (double& v : t.data()) v = std::max(0.0, v);
    return t;
}

Tensor add_row_oracle(Tensor t, const Tensor& row) {
    for (std::size_t i = 0; i < t.rows(); ++i)
        for (std::size_t j = 0; j < t.cols(); ++j) t(i, j) += row[j];
    return t;
}

// Independent coupling forward written with plain loops.
std::pair<Tensor, double> flow_oracle(const FlowParams& flow, const Tensor& h, const Tensor& adj) {
    const std::size_t d = h.cols(), half = d / 2;
    Tensor a = slice_cols(h, 0, half), b = slice_cols(h, half, d);
    double log_det = 0.0;
    auto net = [&](const MessagePassingNet& m, const Tensor& x) {
        return add_row_oracle(naive_matmul(naive_matmul(adj, naive_matmul(x, m.w_prop.value)), m.w_out.value),
                              m.bias.value);
    };
    for (const auto& step : flow.steps) {
        Tensor s = net(step.f_scale, b), t = net(step.f_shift, b);
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double sc = step.s_max * std::tanh(s[i] / step.s_max);
            a[i] = a[i] * std::exp(sc) + t[i];
            log_det += sc;
        }
        s = net(step.g_scale, a);
        t = net(step.g_shift, a);
        for (std::size_t i = 0; i < b.size(); ++i) {
            const double sc = step.s_max * std::tanh(s[i] / step.s_max);
            b[i] = b[i] * std::exp(sc) + t[i];
            log_det += sc;
        }
    }
    return {hconcat(a, b), log_det};
}

}  // namespace

TEST_CASE("GCN encoder equals relu(A (H W)) with a linear last layer") {
    Rng rng(1);
    const GraphSample s = random_sample(6, 2, 3, rng);
    const GcnEncoderParams enc = GcnEncoderParams::init(s.init_features.cols(), 5, 4, 2, rng);
    const Tensor hidden = relu_oracle(naive_matmul(s.norm_adjacency, naive_matmul(s.init_features, enc.weights[0].value)));
    const Tensor oracle = naive_matmul(s.norm_adjacency, naive_matmul(hidden, enc.weights[1].value));
    CHECK(max_abs_diff(gcn_embed(enc, s.norm_adjacency, s.init_features), oracle) < 1e-12);
    CHECK_THROWS_AS(gcn_embed(enc, s.norm_adjacency, Tensor(6, 1)), ContractError);
}

TEST_CASE("GCN encoder is permutation equivariant") {
    Rng rng(2);
    const Graph g = random_graph(7, 0.3, 2, rng);
    std::vector<std::size_t> order{6, 2, 0, 5, 1, 3, 4};
    const GraphSample a = prepare_sample(g, 0, 4), b = prepare_sample(permute_nodes(g, order), 0, 4);
    const GcnEncoderParams enc = GcnEncoderParams::init(a.init_features.cols(), 5, 4, 2, rng);
    CHECK(max_abs_diff(select_rows(gcn_embed(enc, a.norm_adjacency, a.init_features), order),
                       gcn_embed(enc, b.norm_adjacency, b.init_features)) < 1e-12);
}

TEST_CASE("source loss matches a direct BCE + squared-error computation") {
    Rng rng(3);
    const GraphSample s = random_sample(5, 2, 3, rng);
    const Tensor h = random_tensor(5, 4, rng);
    const Tensor x_star = random_tensor(5, s.init_features.cols(), rng);
    double bce = 0.0;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            double z = 0.0;
            for (std::size_t k = 0; k < 4; ++k) z += h(i, k) * h(j, k);
            const double p = sigmoid(z);
            bce -= s.adjacency(i, j) * std::log(p) + (1.0 - s.adjacency(i, j)) * std::log(1.0 - p);
        }
    double sq = 0.0;
    for (std::size_t i = 0; i < x_star.size(); ++i) sq += (s.init_features[i] - x_star[i]) * (s.init_features[i] - x_star[i]);
    for (double alpha : {0.0, 0.7, 1.0}) {
        Tape t;
        Var loss = source_loss(t, t.constant_ref(h), t.constant_ref(s.adjacency), t.constant_ref(s.init_features),
                               t.constant_ref(x_star), alpha);
        CHECK(t.scalar(loss) == doctest::Approx((1 - alpha) * bce + alpha * sq).epsilon(1e-12));
    }
    Tape t;
    CHECK_THROWS_AS(source_loss(t, t.constant_ref(h), t.constant_ref(s.adjacency), t.constant_ref(s.init_features),
                                t.constant_ref(x_star), 1.5),
                    ConfigError);
}

TEST_CASE("saturated logits stay finite through the probability floor") {
    Tensor h(2, 1);
    h(0, 0) = 100.0;
    h(1, 0) = -100.0;
    const Tensor adj = Tensor::from_rows({{0, 1}, {1, 0}});
    Tape t;
    Var loss = adjacency_recon_loss(t, t.constant_ref(h), t.constant_ref(adj));
    CHECK(std::isfinite(t.scalar(loss)));
    // all four entries are pinned at the floor: two on the wrong side of a sure edge, two of a sure non-edge
    CHECK(t.scalar(loss) == doctest::Approx(-4.0 * std::log(kProbabilityFloor)).epsilon(1e-4));
}

TEST_CASE("gradient suite: source, flow and target objectives") {
    const SuiteResult r = gradient_suite(17, 3);
    INFO(r.detail);
    CHECK(r.pass);
}

TEST_CASE("source pretraining lowers the loss and is reproducible") {
    SyntheticSpec spec;
    spec.normal_count = 10;
    const GraphSet set = make_planted_anomaly_set(spec, 4);
    const auto samples = prepare_samples(set, 4);
    std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5};
    SourceConfig sc;
    sc.epochs = 15;
    sc.learning_rate = 1e-2;
    const SourceModel a = pretrain_source(make_training_set(samples, idx), sc, 9);
    const SourceModel b = pretrain_source(make_training_set(samples, idx), sc, 9);
    REQUIRE(a.loss_trace.size() == 15);
    CHECK(a.loss_trace.back() < a.loss_trace.front());
    CHECK(a.loss_trace == b.loss_trace);
    CHECK(a.encoder.params().weights[1].value == b.encoder.params().weights[1].value);
}

TEST_CASE("flow forward matches the loop oracle and inverts") {
    Rng rng(5);
    for (int k = 0; k < 10; ++k) {
        const GraphSample s = random_sample(3 + rng.below(5), 0, 2, rng);
        const FlowParams flow = FlowParams::random(6, 1 + rng.below(3), 2.0, rng, 0.5);
        const Tensor h = random_tensor(s.node_count(), 6, rng);
        const FlowResult out = flow_forward(flow, h, s.norm_adjacency);
        const auto [z, log_det] = flow_oracle(flow, h, s.norm_adjacency);
        CHECK(max_abs_diff(out.z, z) < 1e-12);
        CHECK(out.log_det == doctest::Approx(log_det).epsilon(1e-12));
        CHECK(max_abs_diff(flow_inverse(flow, out.z, s.norm_adjacency), h) < 1e-10);
    }
}

TEST_CASE("flow suites") {
    SUBCASE("zero sub-networks are the identity") {
        const SuiteResult r = flow_identity_suite(3);
        INFO(r.detail);
        CHECK(r.pass);
    }
    SUBCASE("log-determinant agrees with the numeric Jacobian") {
        const SuiteResult r = flow_logdet_suite(4, 14);
        INFO(r.detail);
        CHECK(r.pass);
    }
    SUBCASE("round trip") {
        const SuiteResult r = flow_round_trip_suite(5, 20);
        INFO(r.detail);
        CHECK(r.pass);
    }
}

TEST_CASE("flow contract errors") {
    Rng rng(1);
    CHECK_THROWS_AS(FlowParams::init(5, 2, 2.0, rng), ContractError);
    CHECK_THROWS_AS(FlowParams::init(4, 0, 2.0, rng), ContractError);
    const FlowParams flow = FlowParams::identity(4, 1);
    CHECK_THROWS_AS(flow_forward(flow, Tensor(3, 6), Tensor::identity(3)), ContractError);
    CHECK_THROWS_AS(nf_loss_value(Tensor(0, 4), 0.0, 0), ContractError);
}

TEST_CASE("nf loss value") {
    const Tensor z = Tensor::from_rows({{1.0, 2.0}, {0.0, -1.0}});
    CHECK(nf_loss_value(z, 0.5, 2) == doctest::Approx((0.5 * 6.0 - 0.5) / 2.0));
}

TEST_CASE("flow training lowers the nf loss") {
    SyntheticSpec spec;
    spec.normal_count = 8;
    const GraphSet set = make_planted_anomaly_set(spec, 6);
    const auto samples = prepare_samples(set, 4);
    std::vector<std::size_t> idx{0, 1, 2, 3, 4};
    Rng rng(2);
    std::unordered_map<std::size_t, Tensor> emb;
    for (std::size_t i : idx) emb.emplace(i, random_tensor(samples[i].node_count(), 4, rng, 2.0));
    FlowConfig fc;
    fc.epochs = 30;
    fc.learning_rate = 1e-2;
    const FlowModel m = train_flow_on(emb, make_training_set(samples, idx), FlowParams::init(4, 2, 2.0, rng), fc, 3);
    CHECK(m.loss_trace.back() < m.loss_trace.front());
}

TEST_CASE("GIN layer matches MLP((1+eps)H + AH)") {
    Rng rng(7);
    const GraphSample s = random_sample(5, 2, 3, rng);
    GinParams gin = GinParams::init(s.init_features.cols(), 6, 4, 2, rng);
    gin.layers[0].epsilon = 0.25;
    auto layer = [&](const GinLayer& l, const Tensor& h) {
        Tensor agg = naive_matmul(s.adjacency, h);
        for (std::size_t i = 0; i < agg.size(); ++i) agg[i] += (1.0 + l.epsilon) * h[i];
        const Tensor hidden = relu_oracle(add_row_oracle(naive_matmul(agg, l.w1.value), l.b1.value));
        return add_row_oracle(naive_matmul(hidden, l.w2.value), l.b2.value);
    };
    const Tensor oracle = layer(gin.layers[1], relu_oracle(layer(gin.layers[0], s.init_features)));
    Tape t;
    Var out = gin_forward(t, gin, t.constant_ref(s.adjacency), t.constant_ref(s.init_features));
    CHECK(max_abs_diff(t.value(out), oracle) < 1e-12);
}

TEST_CASE("readouts") {
    const Tensor h = Tensor::from_rows({{1, -2}, {3, -2}, {3, -5}});
    CHECK(readout_max(h) == Tensor::from_rows({{3, -2}}));
    CHECK(max_abs_diff(readout(h, ReadoutKind::mean), Tensor::from_rows({{7.0 / 3.0, -3.0}})) < 1e-15);
    Rng rng(3);
    const Tensor r = random_tensor(6, 3, rng);
    std::vector<std::size_t> order{5, 3, 1, 0, 2, 4};
    CHECK(readout_max(select_rows(r, order)) == readout_max(r));
}

TEST_CASE("scaled cosine distance conventions") {
    const std::vector<double> zero{0, 0}, a{1, 0}, b{-2, 0}, c{0, 3};
    CHECK(distance(zero, zero) == 0.0);
    CHECK(distance(zero, a) == 0.5);
    CHECK(distance(a, zero) == 0.5);
    CHECK(distance(a, a) == doctest::Approx(0.0));
    CHECK(distance(a, b) == doctest::Approx(1.0));
    CHECK(distance(a, c) == doctest::Approx(0.5));
    CHECK(distance(a, b, DistanceKind::squared_euclidean) == doctest::Approx(9.0));
    Rng rng(4);
    for (int k = 0; k < 50; ++k) {
        std::vector<double> u(5), v(5);
        for (auto& x : u) x = rng.uniform(-1, 1);
        for (auto& x : v) x = rng.uniform(-1, 1);
        CHECK(distance(u, v) == doctest::Approx(cosine_oracle(u, v)).epsilon(1e-12));
    }
}

TEST_CASE("target loss matches the weighted oracle") {
    Rng rng(8);
    std::vector<NetworkOutputs> tgt, src;
    double graph_sum = 0.0, node_sum = 0.0;
    for (int g = 0; g < 3; ++g) {
        const std::size_t n = 2 + rng.below(4);
        NetworkOutputs t{random_tensor(n, 3, rng), {}}, s{random_tensor(n, 3, rng), {}};
        t.graph = readout_max(t.nodes);
        s.graph = readout_max(s.nodes);
        graph_sum += cosine_oracle({t.graph.data().begin(), t.graph.data().end()},
                                   {s.graph.data().begin(), s.graph.data().end()});
        double nodes = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            nodes += cosine_oracle({t.nodes.row(i).begin(), t.nodes.row(i).end()},
                                   {s.nodes.row(i).begin(), s.nodes.row(i).end()});
        node_sum += nodes / static_cast<double>(n);
        tgt.push_back(t);
        src.push_back(s);
    }
    const double beta = 0.6;
    CHECK(target_loss(tgt, src, beta) == doctest::Approx((1 - beta) * graph_sum / 3 + beta * node_sum / 3).epsilon(1e-12));
    CHECK_THROWS_AS(target_loss(tgt, src, -0.1), ConfigError);
    Tape t;
    CHECK_THROWS_AS(target_loss(t, t.constant_ref(tgt[0].nodes), t.constant_ref(tgt[0].graph),
                                t.constant(Tensor(tgt[0].nodes.rows() + 1, 3)), t.constant_ref(src[0].graph), 0.5,
                                DistanceKind::cosine),
                    ContractError);
}
