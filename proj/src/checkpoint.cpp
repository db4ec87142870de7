#include "fanfold/checkpoint.hpp"

#include <fstream>

#include "fanfold/errors.hpp"
#include "fanfold/hash.hpp"

namespace fanfold {

namespace {

constexpr const char* kFormat = "fanfold-checkpoint/1";

nlohmann::json body_json(const Checkpoint& c) {
    nlohmann::json tensors = nlohmann::json::array();
    for (const auto& [name, t] : c.tensors) {
        tensors.push_back({{"name", name},
                           {"shape", {t.rows(), t.cols()}},
                           {"values", std::vector<double>(t.data().begin(), t.data().end())}});
    }
    return {{"format", kFormat},
            {"kind", c.kind},
            {"config_fingerprint", c.config_fingerprint},
            {"dataset_fingerprint", c.dataset_fingerprint},
            {"seed", c.seed},
            {"upstream", c.upstream},
            {"meta", c.meta},
            {"tensors", tensors}};
}

template <typename Params>
void add_tensors(Checkpoint& c, const Params& params) {
    for (const Parameter* p : params) c.tensors.emplace_back(p->name, p->value);
}

void fill(const Checkpoint& c, std::vector<Parameter*> params) {
    for (Parameter* p : params) {
        const Tensor& t = c.tensor(p->name);
        if (!t.same_shape(p->value)) {
            throw ParseError(c.kind + " checkpoint", 0,
                             "tensor '" + p->name + "' has shape " + t.shape_string() + ", expected " +
                                 p->value.shape_string());
        }
        p->value = t;
        p->zero_grad();
    }
}

void require_kind(const Checkpoint& c, const std::string& kind) {
    if (c.kind != kind) throw PhaseOrderError("expected a " + kind + " checkpoint, found '" + c.kind + "'");
}

Checkpoint base(const std::string& kind, const CheckpointContext& ctx) {
    Checkpoint c;
    c.kind = kind;
    c.config_fingerprint = ctx.config_fingerprint;
    c.dataset_fingerprint = ctx.dataset_fingerprint;
    c.seed = ctx.seed;
    return c;
}

}  // namespace

std::string Checkpoint::fingerprint() const { return fanfold::fingerprint(body_json(*this).dump()); }

nlohmann::json Checkpoint::to_json() const {
    nlohmann::json doc = body_json(*this);
    doc["fingerprint"] = fingerprint();
    return doc;
}

Checkpoint Checkpoint::from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("format").get<std::string>() != kFormat) {
            throw ParseError("checkpoint", 0, "unsupported format '" + doc.at("format").get<std::string>() + "'");
        }
        Checkpoint c;
        c.kind = doc.at("kind").get<std::string>();
        c.config_fingerprint = doc.at("config_fingerprint").get<std::string>();
        c.dataset_fingerprint = doc.at("dataset_fingerprint").get<std::string>();
        c.seed = doc.at("seed").get<std::uint64_t>();
        c.upstream = doc.at("upstream").get<std::map<std::string, std::string>>();
        c.meta = doc.at("meta");
        for (const auto& jt : doc.at("tensors")) {
            const auto rows = jt.at("shape").at(0).get<std::size_t>();
            const auto cols = jt.at("shape").at(1).get<std::size_t>();
            c.tensors.emplace_back(jt.at("name").get<std::string>(),
                                   Tensor(rows, cols, jt.at("values").get<std::vector<double>>()));
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("checkpoint", 0, std::string("malformed checkpoint: ") + e.what());
    }
}

const Tensor& Checkpoint::tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return t;
    throw ParseError(kind + " checkpoint", 0, "missing tensor '" + name + "'");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    out << ckpt.to_json().dump(1) << '\n';
    if (!out) throw ParseError(path.string(), 0, "failed to write checkpoint");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw PhaseOrderError("checkpoint not found: " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), 0, std::string("invalid JSON: ") + e.what());
    }
    Checkpoint c = Checkpoint::from_json(doc);
    const std::string stored = doc.value("fingerprint", "");
    if (stored != c.fingerprint()) {
        throw PhaseOrderError(path.string() + ": fingerprint mismatch (stored " + stored + ", content " +
                              c.fingerprint() + ")");
    }
    return c;
}

Checkpoint encoder_checkpoint(const SourceModel& model, const CheckpointContext& ctx) {
    Checkpoint c = base("encoder", ctx);
    const GcnEncoderParams& enc = model.encoder.params();
    c.meta = {{"layers", enc.weights.size()},
              {"in_dim", enc.in_dim()},
              {"hidden_dim", enc.weights.size() > 1 ? enc.weights.front().value.cols() : enc.out_dim()},
              {"embed_dim", enc.out_dim()}};
    add_tensors(c, enc.parameters());
    add_tensors(c, model.decoder.parameters());
    return c;
}

SourceModel restore_source(const Checkpoint& c) {
    require_kind(c, "encoder");
    Rng rng(0);
    const auto layers = c.meta.at("layers").get<std::size_t>();
    const auto in_dim = c.meta.at("in_dim").get<std::size_t>();
    const auto hidden = c.meta.at("hidden_dim").get<std::size_t>();
    const auto embed = c.meta.at("embed_dim").get<std::size_t>();
    GcnEncoderParams enc = GcnEncoderParams::init(in_dim, hidden, embed, layers, rng);
    FeatureDecoderParams dec = FeatureDecoderParams::init(embed, in_dim, rng);
    fill(c, enc.parameters());
    fill(c, dec.parameters());
    return SourceModel{FrozenEncoder(std::move(enc)), std::move(dec), {}};
}

Checkpoint flow_checkpoint(const FrozenFlow& flow, const Checkpoint& encoder, const CheckpointContext& ctx) {
    Checkpoint c = base("flow", ctx);
    const FlowParams& p = flow.params();
    c.upstream["encoder"] = encoder.fingerprint();
    c.meta = {{"steps", p.steps.size()}, {"embed_dim", p.embed_dim()}, {"s_max", p.steps.front().s_max}};
    add_tensors(c, p.parameters());
    return c;
}

FrozenFlow restore_flow(const Checkpoint& c) {
    require_kind(c, "flow");
    FlowParams p = FlowParams::identity(c.meta.at("embed_dim").get<std::size_t>(), c.meta.at("steps").get<std::size_t>(),
                                        c.meta.at("s_max").get<double>());
    fill(c, p.parameters());
    return FrozenFlow(std::move(p));
}

Checkpoint target_checkpoint(const TargetParams& params, const Checkpoint& encoder, const Checkpoint* flow,
                             const CheckpointContext& ctx) {
    Checkpoint c = base("target", ctx);
    c.upstream["encoder"] = encoder.fingerprint();
    c.upstream["flow"] = flow ? flow->fingerprint() : "identity";
    if (params.kind == TargetKind::gin) {
        const GinParams& g = params.gin;
        c.meta = {{"kind", "gin"},
                  {"layers", g.layers.size()},
                  {"in_dim", g.in_dim()},
                  {"hidden_dim", g.layers.front().w1.value.cols()},
                  {"out_dim", g.out_dim()}};
    } else {
        const GcnEncoderParams& g = params.gcn;
        c.meta = {{"kind", "gcn"},
                  {"layers", g.weights.size()},
                  {"in_dim", g.in_dim()},
                  {"hidden_dim", g.weights.size() > 1 ? g.weights.front().value.cols() : g.out_dim()},
                  {"out_dim", g.out_dim()}};
    }
    add_tensors(c, params.parameters());
    return c;
}

TargetParams restore_target(const Checkpoint& c) {
    require_kind(c, "target");
    Rng rng(0);
    TargetParams p;
    const auto layers = c.meta.at("layers").get<std::size_t>();
    const auto in_dim = c.meta.at("in_dim").get<std::size_t>();
    const auto hidden = c.meta.at("hidden_dim").get<std::size_t>();
    const auto out = c.meta.at("out_dim").get<std::size_t>();
    if (c.meta.at("kind").get<std::string>() == "gin") {
        p.kind = TargetKind::gin;
        p.gin = GinParams::init(in_dim, hidden, out, layers, rng);
    } else {
        p.kind = TargetKind::gcn;
        p.gcn = GcnEncoderParams::init(in_dim, hidden, out, layers, rng);
    }
    fill(c, p.parameters());
    return p;
}

void require_upstream(const Checkpoint& downstream, const std::string& key, const Checkpoint& upstream) {
    const auto it = downstream.upstream.find(key);
    const std::string found = it == downstream.upstream.end() ? "<none>" : it->second;
    const std::string expected = upstream.fingerprint();
    if (found != expected) {
        throw PhaseOrderError(downstream.kind + " checkpoint was trained against " + key + " " + found +
                              ", but the current " + key + " checkpoint is " + expected);
    }
}

void require_context(const Checkpoint& ckpt, const CheckpointContext& ctx) {
    if (ckpt.config_fingerprint != ctx.config_fingerprint) {
        throw PhaseOrderError(ckpt.kind + " checkpoint config fingerprint " + ckpt.config_fingerprint +
                              " does not match expected " + ctx.config_fingerprint);
    }
    if (ckpt.dataset_fingerprint != ctx.dataset_fingerprint) {
        throw PhaseOrderError(ckpt.kind + " checkpoint dataset fingerprint " + ckpt.dataset_fingerprint +
                              " does not match expected " + ctx.dataset_fingerprint);
    }
    if (ckpt.seed != ctx.seed) {
        throw PhaseOrderError(ckpt.kind + " checkpoint seed " + std::to_string(ckpt.seed) + " does not match expected " +
                              std::to_string(ctx.seed));
    }
}

}  // namespace fanfold
