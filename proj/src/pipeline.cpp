#include "fanfold/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "fanfold/errors.hpp"
#include "fanfold/graph_flow.hpp"
#include "fanfold/hash.hpp"
#include "fanfold/random.hpp"
#include "fanfold/source_network.hpp"
#include "fanfold/target_network.hpp"
#include "fanfold/tudataset.hpp"

namespace fanfold {

namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kSubsampleSeed = 20240229;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    Rng rng(seed * 0x9e3779b97f4a7c15ULL + tag);
    return rng.next_u64();
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string real_text(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trace(const fs::path& path, const std::vector<double>& trace, const std::string& manifest) {
    std::ofstream out(path);
    out << "# manifest " << manifest << "\nepoch,loss\n";
    for (std::size_t i = 0; i < trace.size(); ++i) out << i << ',' << real_text(trace[i]) << '\n';
    if (!out) throw ContractError("failed to write " + path.string());
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Mean over every training node of the latent vector.
double latent_mean_norm(const FlowParams& flow, const std::vector<std::pair<const GraphSample*, const Tensor*>>& items) {
    std::vector<double> mean;
    std::size_t nodes = 0;
    for (const auto& [sample, h] : items) {
        FlowResult r = flow_forward(flow, *h, sample->norm_adjacency);
        if (mean.empty()) mean.assign(r.z.cols(), 0.0);
        for (std::size_t i = 0; i < r.z.rows(); ++i)
            for (std::size_t j = 0; j < r.z.cols(); ++j) mean[j] += r.z(i, j);
        nodes += r.z.rows();
    }
    double s = 0.0;
    for (double m : mean) s += (m / static_cast<double>(nodes)) * (m / static_cast<double>(nodes));
    return std::sqrt(s);
}

}  // namespace

int resolve_normal_class(const ExperimentConfig& config, const GraphSet& set,
                         const std::map<std::string, std::string>& defaults) {
    if (config.normal_class) return *config.normal_class;
    const auto it = defaults.find(config.dataset);
    if (it == defaults.end() || it->second == "majority") return set.majority_label();
    try {
        return std::stoi(it->second);
    } catch (const std::exception&) {
        throw ConfigError("dataset defaults: bad normal class '" + it->second + "' for " + config.dataset);
    }
}

PreparedDataset prepare_dataset(GraphSet set, const ExperimentConfig& config,
                                const std::map<std::string, std::string>& defaults) {
    PreparedDataset d;
    d.normal_class = resolve_normal_class(config, set, defaults);
    d.fingerprint = dataset_fingerprint(set);
    d.samples = prepare_samples(set, config.k_se, config.degree_feature);
    d.set = std::move(set);
    return d;
}

PreparedDataset load_dataset(const ExperimentConfig& config, const std::map<std::string, std::string>& defaults) {
    GraphSet set = parse_tudataset(config.data_dir, config.dataset);
    if (config.max_graphs > 0) set = subsample(set, config.max_graphs, kSubsampleSeed);
    return prepare_dataset(std::move(set), config, defaults);
}

std::string manifest_hash(const ExperimentConfig& config, const std::string& dataset_fingerprint) {
    return fingerprint(config.canonical_text() + "dataset_fingerprint = " + dataset_fingerprint +
                       "\ntool_version = " + kToolVersion + "\n");
}

EmbeddingStage parse_stage(const std::string& text) {
    if (text == "source") return EmbeddingStage::source;
    if (text == "flow") return EmbeddingStage::flow;
    if (text == "target") return EmbeddingStage::target;
    throw ConfigError("unknown embedding stage '" + text + "' (expected source, flow or target)");
}

std::string to_string(EmbeddingStage stage) {
    switch (stage) {
        case EmbeddingStage::source: return "source";
        case EmbeddingStage::flow: return "flow";
        case EmbeddingStage::target: return "target";
    }
    return "source";
}

// SeedRun -------------------------------------------------------------------

SeedRun::SeedRun(const ExperimentConfig& config, const PreparedDataset& data, std::uint64_t seed)
    : config_(config), data_(data), seed_(seed) {
    config_.validate();
    split_ = make_anomaly_split(data_.set, data_.normal_class, config_.test_fraction, seed_);
    ctx_ = CheckpointContext{config_.fingerprint(), data_.fingerprint, seed_};
    report_.seed = seed_;
    report_.train_size = split_.train.size();
    report_.test_size = split_.test.size();
    report_.anomalies = split_.anomaly_count();
}

bool SeedRun::needs_flow() const { return config_.variant == Variant::full; }
bool SeedRun::needs_target() const { return config_.variant != Variant::non_st; }

void SeedRun::train_source() {
    Stopwatch clock;
    SourceConfig sc;
    sc.layers = config_.gcn_layers;
    sc.hidden_dim = config_.hidden_dim;
    sc.embed_dim = config_.embed_dim;
    sc.alpha = config_.alpha;
    sc.epochs = config_.s_epochs;
    sc.learning_rate = config_.lr;
    sc.batch_size = config_.batch_size;
    TrainingSet train = make_training_set(data_.samples, split_.train, &guard_);
    source_ = pretrain_source(train, sc, derive_seed(seed_, 1));
    report_.source_trace = source_->loss_trace;
    encoder_ckpt_ = encoder_checkpoint(*source_, ctx_);
    flow_.reset();
    flow_ckpt_.reset();
    target_.reset();
    target_ckpt_.reset();
    guard_.verify(split_);
    report_.times.source = clock.seconds();
}

void SeedRun::train_flow() {
    if (!needs_flow()) return;
    if (!source_) throw PhaseOrderError("flow phase requires a trained source encoder");
    Stopwatch clock;
    FlowConfig fc;
    fc.steps = config_.mp_steps;
    fc.s_max = config_.s_max;
    fc.epochs = config_.n_epochs;
    fc.learning_rate = config_.lr;
    fc.batch_size = config_.batch_size;

    TrainingSet train = make_training_set(data_.samples, split_.train, &guard_);
    std::unordered_map<std::size_t, Tensor> embeddings;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const GraphSample& s = train.at(i);
        embeddings.emplace(s.index, source_->encoder.embed(s));
    }
    std::vector<std::pair<const GraphSample*, const Tensor*>> items;
    for (std::size_t idx : split_.train) items.emplace_back(&data_.samples[idx], &embeddings.at(idx));

    double first = 0.0, last = 0.0;
    const std::size_t epochs = fc.epochs;
    auto snapshot = [&](std::size_t epoch, const FlowParams& params) {
        if (epoch == 0) first = latent_mean_norm(params, items);
        if (epoch + 1 == epochs) last = latent_mean_norm(params, items);
    };

    Rng rng(derive_seed(seed_, 2));
    FlowParams init = FlowParams::init(config_.embed_dim, fc.steps, fc.s_max, rng);
    FlowModel model = train_flow_on(embeddings, train, std::move(init), fc, rng.next_u64(), snapshot);
    if (epochs > 0) report_.latent_mean_norm = std::make_pair(first, last);
    report_.flow_trace = model.loss_trace;
    flow_ = std::move(model.flow);
    flow_ckpt_ = flow_checkpoint(*flow_, *encoder_ckpt_, ctx_);
    target_.reset();
    target_ckpt_.reset();
    guard_.verify(split_);
    report_.times.flow = clock.seconds();
}

void SeedRun::train_target() {
    if (!needs_target()) return;
    if (!source_) throw PhaseOrderError("target phase requires a trained source encoder");
    if (needs_flow() && !flow_) throw PhaseOrderError("target phase requires a trained flow");
    Stopwatch clock;
    TargetConfig tc;
    tc.kind = config_.variant == Variant::asy_st ? TargetKind::gcn : TargetKind::gin;
    tc.layers = tc.kind == TargetKind::gcn ? config_.gcn_layers : config_.gin_layers;
    tc.hidden_dim = config_.hidden_dim;
    tc.beta = config_.beta;
    tc.epochs = config_.t_epochs;
    tc.learning_rate = config_.lr;
    tc.batch_size = config_.batch_size;
    tc.distance = config_.distance;
    tc.readout = config_.readout;

    TrainingSet train = make_training_set(data_.samples, split_.train, &guard_);
    SourceSide side(source_->encoder, needs_flow() ? &*flow_ : nullptr);
    TargetModel model = fanfold::train_target(side, train, tc, derive_seed(seed_, 3));
    report_.target_trace = model.loss_trace;
    target_ = std::move(model.params);
    target_ckpt_ = target_checkpoint(*target_, *encoder_ckpt_, flow_ckpt_ ? &*flow_ckpt_ : nullptr, ctx_);
    guard_.verify(split_);
    report_.times.target = clock.seconds();
}

void SeedRun::train_all() {
    train_source();
    train_flow();
    train_target();
}

void SeedRun::save(const fs::path& dir) const {
    fs::create_directories(dir);
    const std::string manifest = manifest_hash(config_, data_.fingerprint);
    if (encoder_ckpt_) {
        save_checkpoint(dir / "encoder.ckpt", *encoder_ckpt_);
        if (!report_.source_trace.empty() || config_.s_epochs == 0)
            write_trace(dir / "loss_source.csv", report_.source_trace, manifest);
    }
    if (flow_ckpt_) {
        save_checkpoint(dir / "flow.ckpt", *flow_ckpt_);
        write_trace(dir / "loss_flow.csv", report_.flow_trace, manifest);
        if (report_.latent_mean_norm) {
            std::ofstream out(dir / "latent_mean.csv");
            out << "# manifest " << manifest << "\nepoch,latent_mean_norm\n"
                << "first," << real_text(report_.latent_mean_norm->first) << '\n'
                << "last," << real_text(report_.latent_mean_norm->second) << '\n';
        }
    }
    if (target_ckpt_) {
        save_checkpoint(dir / "target.ckpt", *target_ckpt_);
        write_trace(dir / "loss_target.csv", report_.target_trace, manifest);
    }
}

void SeedRun::load(const fs::path& dir, const std::string& upto) {
    if (upto != "source" && upto != "flow" && upto != "target") throw ConfigError("unknown phase '" + upto + "'");
    Checkpoint enc = load_checkpoint(dir / "encoder.ckpt");
    require_context(enc, ctx_);
    source_ = restore_source(enc);
    encoder_ckpt_ = std::move(enc);
    flow_.reset();
    flow_ckpt_.reset();
    target_.reset();
    target_ckpt_.reset();
    if (upto == "source") return;

    if (needs_flow()) {
        Checkpoint fl = load_checkpoint(dir / "flow.ckpt");
        require_context(fl, ctx_);
        require_upstream(fl, "encoder", *encoder_ckpt_);
        flow_ = restore_flow(fl);
        flow_ckpt_ = std::move(fl);
    }
    if (upto == "flow" || !needs_target()) return;

    Checkpoint tg = load_checkpoint(dir / "target.ckpt");
    require_context(tg, ctx_);
    require_upstream(tg, "encoder", *encoder_ckpt_);
    if (flow_ckpt_) {
        require_upstream(tg, "flow", *flow_ckpt_);
    } else if (tg.upstream.count("flow") && tg.upstream.at("flow") != "identity") {
        throw PhaseOrderError("target checkpoint expects flow " + tg.upstream.at("flow") + " but this variant has none");
    }
    target_ = restore_target(tg);
    target_ckpt_ = std::move(tg);
}

ScoreBreakdown SeedRun::score(const GraphSample& s) const {
    if (!source_) throw PhaseOrderError("scoring requires a trained source encoder");
    ScoreBreakdown b;
    if (config_.variant == Variant::non_st) {
        b.raw = b.score = source_loss_value(*source_, s, config_.alpha);
        return b;
    }
    if (!target_) throw PhaseOrderError("scoring requires a trained target network");
    if (needs_flow() && !flow_) throw PhaseOrderError("scoring requires a trained flow");
    SourceSide side(source_->encoder, needs_flow() ? &*flow_ : nullptr);
    const Tensor src_nodes = side.node_outputs(s);
    const Tensor tgt_nodes = target_embed(*target_, s);
    const Tensor src_graph = readout(src_nodes, config_.readout);
    const Tensor tgt_graph = readout(tgt_nodes, config_.readout);
    b.graph_term = distance(tgt_graph.data(), src_graph.data(), config_.distance);
    double nodes = 0.0;
    for (std::size_t i = 0; i < s.node_count(); ++i)
        nodes += distance(tgt_nodes.row(i), src_nodes.row(i), config_.distance);
    b.node_term = nodes / static_cast<double>(s.node_count());
    b.raw = b.graph_term + b.node_term;
    b.score = 0.5 * b.raw;
    return b;
}

SeedReport SeedRun::evaluate() {
    Stopwatch clock;
    SeedReport r = report_;
    r.scores.clear();
    std::vector<double> scores;
    for (std::size_t k = 0; k < split_.test.size(); ++k) {
        const std::size_t idx = split_.test[k];
        const ScoreBreakdown b = score(data_.samples[idx]);
        if (!std::isfinite(b.score)) throw NumericFault("non-finite anomaly score for graph " + std::to_string(idx));
        r.scores.push_back({idx, split_.test_is_anomaly[k] != 0, b.score, b.raw});
        scores.push_back(b.score);
    }
    r.auc = compute_auc(scores, split_.test_is_anomaly);
    r.times.scoring = clock.seconds();
    report_.times.scoring = r.times.scoring;
    return r;
}

std::vector<EmbeddingRow> SeedRun::export_embeddings(EmbeddingStage stage) const {
    if (!source_) throw PhaseOrderError("embedding export requires a trained source encoder");
    if (stage == EmbeddingStage::flow && needs_flow() && !flow_) {
        throw PhaseOrderError("flow-stage export requires a trained flow");
    }
    if (stage == EmbeddingStage::target && !target_) {
        throw PhaseOrderError("target-stage export requires a trained target network");
    }
    std::vector<std::pair<std::size_t, bool>> graphs;
    for (std::size_t idx : split_.train) graphs.emplace_back(idx, false);
    for (std::size_t k = 0; k < split_.test.size(); ++k) graphs.emplace_back(split_.test[k], split_.test_is_anomaly[k] != 0);
    std::sort(graphs.begin(), graphs.end());

    std::vector<EmbeddingRow> rows;
    for (const auto& [idx, anomaly] : graphs) {
        const GraphSample& s = data_.samples[idx];
        Tensor nodes;
        switch (stage) {
            case EmbeddingStage::source: nodes = source_->encoder.embed(s); break;
            case EmbeddingStage::flow:
                nodes = SourceSide(source_->encoder, flow_ ? &*flow_ : nullptr).node_outputs(s);
                break;
            case EmbeddingStage::target: nodes = target_embed(*target_, s); break;
        }
        const Tensor g = readout(nodes, config_.readout);
        rows.push_back({idx, anomaly, std::vector<double>(g.data().begin(), g.data().end())});
    }
    return rows;
}

// Reports ---------------------------------------------------------------------

std::vector<double> ScoreReport::per_seed_auc() const {
    std::vector<double> out;
    for (const auto& s : seeds) out.push_back(s.auc);
    return out;
}

nlohmann::json ScoreReport::to_json(bool with_timing) const {
    nlohmann::json seeds_json = nlohmann::json::array();
    nlohmann::json timing = nlohmann::json::array();
    for (const auto& s : seeds) {
        nlohmann::json scores = nlohmann::json::array();
        for (const auto& g : s.scores) {
            scores.push_back({{"graph", g.graph}, {"anomaly", g.anomaly}, {"score", g.score}, {"raw_score", g.raw_score}});
        }
        seeds_json.push_back({{"seed", s.seed},
                              {"auc", s.auc},
                              {"train_size", s.train_size},
                              {"test_size", s.test_size},
                              {"anomalies", s.anomalies},
                              {"scores", scores}});
        timing.push_back({{"seed", s.seed},
                          {"source_s", s.times.source},
                          {"flow_s", s.times.flow},
                          {"target_s", s.times.target},
                          {"scoring_s", s.times.scoring}});
    }
    nlohmann::json doc = {{"format", "fanfold-report/1"},
                          {"dataset", dataset},
                          {"data_dir", data_dir},
                          {"variant", to_string(variant)},
                          {"normal_class", normal_class},
                          {"manifest", {{"hash", manifest}, {"tool_version", kToolVersion}, {"config", config_text}}},
                          {"config_fingerprint", config_fingerprint},
                          {"dataset_fingerprint", dataset_fingerprint},
                          {"auc", {{"mean", auc.mean}, {"std", auc.stddev}, {"per_seed", per_seed_auc()}}},
                          {"seeds", seeds_json}};
    if (with_timing) doc["timing"] = {{"created_at", utc_timestamp()}, {"per_seed", timing}};
    return doc;
}

ScoreReport ScoreReport::from_json(const nlohmann::json& doc) {
    try {
        ScoreReport r;
        r.dataset = doc.at("dataset").get<std::string>();
        r.data_dir = doc.value("data_dir", "");
        r.variant = parse_variant(doc.at("variant").get<std::string>());
        r.normal_class = doc.at("normal_class").get<int>();
        r.manifest = doc.at("manifest").at("hash").get<std::string>();
        r.config_text = doc.at("manifest").at("config").get<std::string>();
        r.config_fingerprint = doc.at("config_fingerprint").get<std::string>();
        r.dataset_fingerprint = doc.at("dataset_fingerprint").get<std::string>();
        r.auc.mean = doc.at("auc").at("mean").get<double>();
        r.auc.stddev = doc.at("auc").at("std").get<double>();
        for (const auto& js : doc.at("seeds")) {
            SeedReport s;
            s.seed = js.at("seed").get<std::uint64_t>();
            s.auc = js.at("auc").get<double>();
            s.train_size = js.at("train_size").get<std::size_t>();
            s.test_size = js.at("test_size").get<std::size_t>();
            s.anomalies = js.at("anomalies").get<std::size_t>();
            for (const auto& g : js.at("scores")) {
                s.scores.push_back({g.at("graph").get<std::size_t>(), g.at("anomaly").get<bool>(),
                                    g.at("score").get<double>(), g.at("raw_score").get<double>()});
            }
            r.seeds.push_back(std::move(s));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("report", 0, std::string("malformed report: ") + e.what());
    }
}

ScoreReport assemble_report(const ExperimentConfig& config, const PreparedDataset& data,
                            std::vector<SeedReport> seeds) {
    ScoreReport r;
    r.dataset = config.dataset;
    r.data_dir = config.data_dir.string();
    r.variant = config.variant;
    r.normal_class = data.normal_class;
    r.config_text = config.canonical_text();
    r.config_fingerprint = config.fingerprint();
    r.dataset_fingerprint = data.fingerprint;
    r.manifest = manifest_hash(config, data.fingerprint);
    r.seeds = std::move(seeds);
    const auto aucs = r.per_seed_auc();
    r.auc = mean_std(aucs);
    return r;
}

namespace {

template <typename Body>
SeedReport annotate(std::uint64_t seed, Body&& body) {
    try {
        return body();
    } catch (const TrainingFault& e) {
        throw TrainingFault("seed " + std::to_string(seed), e.epoch(), e.what());
    } catch (const PhaseOrderError& e) {
        throw PhaseOrderError("seed " + std::to_string(seed) + ": " + e.what());
    } catch (const UndefinedMetricError& e) {
        throw UndefinedMetricError("seed " + std::to_string(seed) + ": " + e.what());
    } catch (const NumericFault& e) {
        throw NumericFault("seed " + std::to_string(seed) + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError("seed " + std::to_string(seed) + ": " + e.what());
    }
}

// Runs body(seed) for every seed on a small worker pool; results keep seed order.
template <typename Body>
std::vector<SeedReport> for_each_seed(const std::vector<std::uint64_t>& seeds, unsigned threads, Body body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(seeds.size()));
    std::vector<std::optional<SeedReport>> slots(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < seeds.size(); k = next++) {
            try {
                slots[k] = annotate(seeds[k], [&] { return body(seeds[k]); });
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<SeedReport> out;
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace

ScoreReport run_experiment(const ExperimentConfig& config, const PreparedDataset& data,
                           const std::optional<fs::path>& out_dir, unsigned threads) {
    config.validate();
    auto seeds = for_each_seed(config.seeds, threads, [&](std::uint64_t seed) {
        SeedRun run(config, data, seed);
        run.train_all();
        if (out_dir) run.save(*out_dir / std::to_string(seed));
        return run.evaluate();
    });
    return assemble_report(config, data, std::move(seeds));
}

ScoreReport evaluate_checkpoints(const ExperimentConfig& config, const PreparedDataset& data, const fs::path& out_dir,
                                 unsigned threads) {
    config.validate();
    std::vector<std::string> missing;
    for (std::uint64_t seed : config.seeds) {
        const fs::path dir = out_dir / std::to_string(seed);
        const bool has_all = fs::exists(dir / "encoder.ckpt") &&
                             (config.variant != Variant::full || fs::exists(dir / "flow.ckpt")) &&
                             (config.variant == Variant::non_st || fs::exists(dir / "target.ckpt"));
        if (!has_all) missing.push_back(std::to_string(seed));
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& s : missing) list += (list.empty() ? "" : ", ") + s;
        throw PhaseOrderError("missing checkpoints under " + out_dir.string() + " for seeds: " + list);
    }
    auto seeds = for_each_seed(config.seeds, threads, [&](std::uint64_t seed) {
        SeedRun run(config, data, seed);
        run.load(out_dir / std::to_string(seed), "target");
        return run.evaluate();
    });
    return assemble_report(config, data, std::move(seeds));
}

void write_report(const ScoreReport& report, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir / "report.json");
    out << report.to_json(true).dump(2) << '\n';
    if (!out) throw ContractError("failed to write report.json");
    write_scores_csv(report, out_dir / "scores.csv");
}

void write_scores_csv(const ScoreReport& report, const fs::path& path) {
    std::ofstream out(path);
    out << "# manifest " << report.manifest << "\nseed,graph,anomaly,score,raw_score\n";
    for (const auto& s : report.seeds)
        for (const auto& g : s.scores)
            out << s.seed << ',' << g.graph << ',' << (g.anomaly ? 1 : 0) << ',' << real_text(g.score) << ','
                << real_text(g.raw_score) << '\n';
    if (!out) throw ContractError("failed to write " + path.string());
}

void write_embeddings_csv(const std::vector<EmbeddingRow>& rows, const std::string& manifest, const fs::path& path) {
    std::ofstream out(path);
    out << "# manifest " << manifest << "\ngraph,anomaly";
    const std::size_t d = rows.empty() ? 0 : rows.front().vector.size();
    for (std::size_t j = 0; j < d; ++j) out << ",e" << j;
    out << '\n';
    for (const auto& r : rows) {
        out << r.graph << ',' << (r.anomaly ? 1 : 0);
        for (double v : r.vector) out << ',' << real_text(v);
        out << '\n';
    }
    if (!out) throw ContractError("failed to write " + path.string());
}

Histogram score_histogram(const ScoreReport& report, double bin_width) {
    if (!(bin_width > 0.0 && bin_width <= 1.0)) throw ConfigError("histogram bin width must lie in (0, 1]");
    const auto bins = static_cast<std::size_t>(std::llround(1.0 / bin_width));
    Histogram h;
    h.bin_width = bin_width;
    h.normal.assign(bins, 0);
    h.anomaly.assign(bins, 0);
    for (const auto& s : report.seeds) {
        for (const auto& g : s.scores) {
            const double clamped = std::clamp(g.score, 0.0, 1.0);
            auto bin = static_cast<std::size_t>(clamped / bin_width);
            if (bin >= bins) bin = bins - 1;
            (g.anomaly ? h.anomaly : h.normal)[bin] += 1;
        }
    }
    return h;
}

void write_histogram_csv(const Histogram& h, const std::string& manifest, const fs::path& path) {
    std::ofstream out(path);
    out << "# manifest " << manifest << "\nbin_lo,bin_hi,normal,anomaly\n";
    for (std::size_t b = 0; b < h.normal.size(); ++b) {
        char edges[64];
        std::snprintf(edges, sizeof edges, "%.6g,%.6g", static_cast<double>(b) * h.bin_width,
                      static_cast<double>(b + 1) * h.bin_width);
        out << edges << ',' << h.normal[b] << ',' << h.anomaly[b] << '\n';
    }
    if (!out) throw ContractError("failed to write " + path.string());
}

}  // namespace fanfold
