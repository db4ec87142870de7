#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fanfold/checkpoint.hpp"
#include "fanfold/config.hpp"
#include "fanfold/graph.hpp"
#include "fanfold/metrics.hpp"
#include "fanfold/sample.hpp"

namespace fanfold {

inline constexpr const char* kToolVersion = "0.1.0";

// A parsed dataset with per-graph tensors and the resolved normal class.
struct PreparedDataset {
    GraphSet set;
    std::vector<GraphSample> samples;
    std::string fingerprint;
    int normal_class = 0;
};

// Resolves normal_class: explicit config value, else the defaults table
// (`majority` or a class id), else the majority class.
int resolve_normal_class(const ExperimentConfig& config, const GraphSet& set,
                         const std::map<std::string, std::string>& defaults);

PreparedDataset prepare_dataset(GraphSet set, const ExperimentConfig& config,
                                const std::map<std::string, std::string>& defaults = {});
// Parses config.data_dir / config.dataset, applies max_graphs subsampling.
PreparedDataset load_dataset(const ExperimentConfig& config, const std::map<std::string, std::string>& defaults = {});

// Hash of (resolved config, dataset fingerprint, tool version); embedded in
// every artifact.
std::string manifest_hash(const ExperimentConfig& config, const std::string& dataset_fingerprint);

struct ScoreBreakdown {
    double score = 0.0;       // mean of the graph and node terms, in [0, 1] for cosine
    double raw = 0.0;         // graph term + node term
    double graph_term = 0.0;
    double node_term = 0.0;
};

struct GraphScore {
    std::size_t graph = 0;
    bool anomaly = false;
    double score = 0.0;
    double raw_score = 0.0;
};

struct PhaseTimes {
    double source = 0.0;
    double flow = 0.0;
    double target = 0.0;
    double scoring = 0.0;
};

struct SeedReport {
    std::uint64_t seed = 0;
    double auc = 0.0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::size_t anomalies = 0;
    std::vector<GraphScore> scores;
    std::vector<double> source_trace, flow_trace, target_trace;
    // ‖mean of the latent node vectors over training graphs‖ after the first
    // and the last flow epoch (absent without a flow).
    std::optional<std::pair<double, double>> latent_mean_norm;
    PhaseTimes times;
};

struct ScoreReport {
    std::string dataset;
    std::string data_dir;
    Variant variant = Variant::full;
    int normal_class = 0;
    std::string config_text;
    std::string config_fingerprint;
    std::string dataset_fingerprint;
    std::string manifest;
    std::vector<SeedReport> seeds;
    MeanStd auc;

    std::vector<double> per_seed_auc() const;
    // `with_timing == false` drops every wall-clock field, leaving a body that
    // is byte-identical across reruns.
    nlohmann::json to_json(bool with_timing = true) const;
    static ScoreReport from_json(const nlohmann::json& doc);
};

enum class EmbeddingStage { source, flow, target };
EmbeddingStage parse_stage(const std::string& text);
std::string to_string(EmbeddingStage stage);

struct EmbeddingRow {
    std::size_t graph = 0;
    bool anomaly = false;
    std::vector<double> vector;
};

// Everything one seed needs: split, guard, the three phases and scoring. The
// config is copied; `data` must outlive the run.
// Phases must run in order; a later phase without its upstream raises
// PhaseOrderError.
class SeedRun {
public:
    SeedRun(const ExperimentConfig& config, const PreparedDataset& data, std::uint64_t seed);

    const AnomalySplit& split() const { return split_; }
    const SplitGuard& guard() const { return guard_; }
    std::uint64_t seed() const { return seed_; }
    const CheckpointContext& context() const { return ctx_; }

    void train_source();
    void train_flow();
    void train_target();
    void train_all();

    bool needs_flow() const;
    bool needs_target() const;

    // <dir>/{encoder,flow,target}.ckpt and loss_<phase>.csv for the phases run.
    void save(const std::filesystem::path& dir) const;
    // Loads whichever checkpoints `upto` requires, verifying the hash chain.
    void load(const std::filesystem::path& dir, const std::string& upto);

    ScoreBreakdown score(const GraphSample& s) const;
    SeedReport evaluate();
    std::vector<EmbeddingRow> export_embeddings(EmbeddingStage stage) const;

    const SeedReport& partial_report() const { return report_; }

private:
    ExperimentConfig config_;
    const PreparedDataset& data_;
    std::uint64_t seed_;
    AnomalySplit split_;
    SplitGuard guard_;
    CheckpointContext ctx_;
    SeedReport report_;

    std::optional<SourceModel> source_;
    std::optional<FrozenFlow> flow_;
    std::optional<TargetParams> target_;
    std::optional<Checkpoint> encoder_ckpt_, flow_ckpt_, target_ckpt_;
};

// Seeds run on up to `threads` workers (0 = hardware concurrency); results
// do not depend on the thread count. When `out_dir` is set, checkpoints and loss
// traces go to <out_dir>/<seed>/.
ScoreReport run_experiment(const ExperimentConfig& config, const PreparedDataset& data,
                           const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                           unsigned threads = 0);

// Scores every seed from checkpoints under <out_dir>/<seed>/.
ScoreReport evaluate_checkpoints(const ExperimentConfig& config, const PreparedDataset& data,
                                 const std::filesystem::path& out_dir, unsigned threads = 0);

ScoreReport assemble_report(const ExperimentConfig& config, const PreparedDataset& data,
                            std::vector<SeedReport> seeds);

void write_report(const ScoreReport& report, const std::filesystem::path& out_dir);
void write_scores_csv(const ScoreReport& report, const std::filesystem::path& path);
void write_embeddings_csv(const std::vector<EmbeddingRow>& rows, const std::string& manifest,
                          const std::filesystem::path& path);

// Per-class score histograms, bins of width `bin_width` over [0, 1] (scores
// outside are clamped into the end bins). Columns: bin_lo, bin_hi, normal, anomaly.
struct Histogram {
    double bin_width = 0.02;
    std::vector<std::size_t> normal;
    std::vector<std::size_t> anomaly;
};
Histogram score_histogram(const ScoreReport& report, double bin_width = 0.02);
void write_histogram_csv(const Histogram& h, const std::string& manifest, const std::filesystem::path& path);

}  // namespace fanfold
