// fanfold command-line tool: prepare, train, eval, plotdata, synth.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fanfold/errors.hpp"
#include "fanfold/pipeline.hpp"
#include "fanfold/synthetic.hpp"
#include "fanfold/tudataset.hpp"

namespace fs = std::filesystem;
using namespace fanfold;

namespace {

struct Common {
    std::string seed_override;
    std::string out_dir;
    std::string defaults_path = "config/dataset_defaults.txt";
    unsigned threads = 0;
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    ExperimentConfig tmp;
    apply_setting(tmp, "seeds", text);
    if (tmp.seeds.empty()) throw ConfigError("--seed-override needs at least one seed");
    return tmp.seeds;
}

ExperimentConfig resolve_config(const std::string& path, const Common& common, const std::string& variant) {
    ExperimentConfig config = load_config(path);
    if (!common.seed_override.empty()) config.seeds = parse_seed_list(common.seed_override);
    if (!variant.empty()) config.variant = parse_variant(variant);
    // a relative data_dir is taken relative to the config file
    if (config.data_dir.is_relative() && !fs::exists(config.data_dir)) {
        const fs::path beside = fs::path(path).parent_path() / config.data_dir;
        if (fs::exists(beside)) config.data_dir = beside;
    }
    config.validate();
    return config;
}

fs::path run_dir(const ExperimentConfig& config, const Common& common) {
    if (!common.out_dir.empty()) return common.out_dir;
    return fs::path("runs") / (config.dataset + "_" + to_string(config.variant));
}

void print_auc_row(const ScoreReport& report) {
    std::printf("%-12s %-7s %6.2f±%.2f\n", report.dataset.c_str(), to_string(report.variant).c_str(),
                100.0 * report.auc.mean, 100.0 * report.auc.stddev);
}

int cmd_prepare(const std::string& dir, const std::string& name, const Common& common) {
    GraphSet set = parse_tudataset(dir, name);
    std::printf("%zu graphs, avg nodes %.2f, avg edges %.2f\n", set.size(), set.average_nodes(), set.average_edges());
    std::printf("feature dim %zu, classes:", set.feature_dim());
    for (int label : set.label_vocabulary) std::printf(" %d(%zu)", label, set.count_label(label));
    std::printf("\n");
    const fs::path out_dir = common.out_dir.empty() ? fs::path(".") : fs::path(common.out_dir);
    fs::create_directories(out_dir);
    const fs::path out = out_dir / (name + ".json");
    std::ofstream f(out);
    f << graphset_to_json(set).dump() << '\n';
    if (!f) throw ContractError("failed to write " + out.string());
    std::printf("fingerprint %s -> %s\n", dataset_fingerprint(set).c_str(), out.string().c_str());
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& phase, const std::string& variant,
              const Common& common) {
    const ExperimentConfig config = resolve_config(config_path, common, variant);
    const PreparedDataset data = load_dataset(config, load_dataset_defaults(common.defaults_path));
    const fs::path out = run_dir(config, common);

    if (phase == "all") {
        const ScoreReport report = run_experiment(config, data, out, common.threads);
        write_report(report, out);
        print_auc_row(report);
        return 0;
    }
    for (std::uint64_t seed : config.seeds) {
        SeedRun run(config, data, seed);
        const fs::path dir = out / std::to_string(seed);
        if (phase == "source") {
            run.train_source();
        } else if (phase == "flow") {
            if (!run.needs_flow()) throw ConfigError("variant " + to_string(config.variant) + " has no flow phase");
            run.load(dir, "source");
            run.train_flow();
        } else if (phase == "target") {
            if (!run.needs_target()) throw ConfigError("variant " + to_string(config.variant) + " has no target phase");
            run.load(dir, run.needs_flow() ? "flow" : "source");
            run.train_target();
        } else {
            throw ConfigError("unknown phase '" + phase + "' (expected all, source, flow or target)");
        }
        run.save(dir);
        std::printf("seed %llu: %s phase done -> %s\n", static_cast<unsigned long long>(seed), phase.c_str(),
                    dir.string().c_str());
    }
    return 0;
}

int cmd_eval(const std::string& config_path, const std::string& variant, const Common& common) {
    const ExperimentConfig config = resolve_config(config_path, common, variant);
    const PreparedDataset data = load_dataset(config, load_dataset_defaults(common.defaults_path));
    const fs::path out = run_dir(config, common);
    const ScoreReport report = evaluate_checkpoints(config, data, out, common.threads);
    write_report(report, out);
    print_auc_row(report);
    return 0;
}

int cmd_plotdata(const std::string& report_path, double bin_width, bool embeddings, const Common& common) {
    std::ifstream in(report_path);
    if (!in) throw ParseError(report_path, 0, "cannot open report");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(report_path, 0, std::string("invalid JSON: ") + e.what());
    }
    const ScoreReport report = ScoreReport::from_json(doc);
    std::size_t graphs = 0;
    for (const auto& s : report.seeds) graphs += s.scores.size();
    if (graphs == 0) throw ContractError(report_path + ": report contains no scored graphs");

    const fs::path run = fs::path(report_path).parent_path();
    const fs::path out = common.out_dir.empty() ? run : fs::path(common.out_dir);
    fs::create_directories(out);
    write_histogram_csv(score_histogram(report, bin_width), report.manifest, out / "histogram.csv");
    std::printf("wrote %s\n", (out / "histogram.csv").string().c_str());
    if (!embeddings) return 0;

    ExperimentConfig config = parse_config(report.config_text, report_path + " (embedded config)");
    config.data_dir = report.data_dir.empty() ? fs::path("data") : fs::path(report.data_dir);
    config.seeds.clear();
    for (const auto& s : report.seeds) config.seeds.push_back(s.seed);
    if (!common.seed_override.empty()) config.seeds = parse_seed_list(common.seed_override);
    config.normal_class = report.normal_class;
    const PreparedDataset data = load_dataset(config);
    if (data.fingerprint != report.dataset_fingerprint) {
        throw PhaseOrderError("dataset fingerprint " + data.fingerprint + " does not match the report's " +
                              report.dataset_fingerprint);
    }
    for (std::uint64_t seed : config.seeds) {
        SeedRun seed_run(config, data, seed);
        seed_run.load(run / std::to_string(seed), "target");
        std::vector<EmbeddingStage> stages{EmbeddingStage::source};
        if (seed_run.needs_flow()) stages.push_back(EmbeddingStage::flow);
        if (seed_run.needs_target()) stages.push_back(EmbeddingStage::target);
        for (EmbeddingStage stage : stages) {
            const fs::path path = out / ("embeddings_" + to_string(stage) + "_seed" + std::to_string(seed) + ".csv");
            write_embeddings_csv(seed_run.export_embeddings(stage), report.manifest, path);
            std::printf("wrote %s\n", path.string().c_str());
        }
    }
    return 0;
}

int cmd_synth(const std::string& dir, std::uint64_t seed) {
    const GraphSet set = make_planted_anomaly_set(SyntheticSpec{}, seed);
    write_tudataset(set, dir);
    std::printf("%zu graphs (%zu normal, %zu anomalous) -> %s/%s_*.txt\n", set.size(), set.count_label(0),
                set.count_label(1), dir.c_str(), set.name.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fanfold: graph-level anomaly detection by source/target distillation with a graph flow"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--seed-override", common.seed_override, "Comma-separated seeds replacing the config's list");
    app.add_option("--out-dir", common.out_dir, "Output directory (default runs/<dataset>_<variant>)");
    app.add_option("--defaults", common.defaults_path, "Per-dataset normal-class defaults file");
    app.add_option("--threads", common.threads, "Worker threads for seeds (0 = all cores)");

    std::string dir, name, config_path, phase = "all", variant, report_path;
    double bin_width = 0.02;
    bool no_embeddings = false;
    std::uint64_t synth_seed = 0;

    auto* prepare = app.add_subcommand("prepare", "Parse a TUDataset directory, print statistics, dump canonical JSON");
    prepare->add_option("dir", dir)->required();
    prepare->add_option("name", name)->required();

    auto* train = app.add_subcommand("train", "Train one phase or the whole pipeline for every seed");
    train->add_option("config", config_path)->required();
    train->add_option("--phase", phase, "all, source, flow or target");
    train->add_option("--variant", variant, "full, non_st, asy_st or non_nf");

    auto* eval = app.add_subcommand("eval", "Score test graphs from saved checkpoints");
    eval->add_option("config", config_path)->required();
    eval->add_option("--variant", variant, "full, non_st, asy_st or non_nf");

    auto* plot = app.add_subcommand("plotdata", "Emit score histograms and embedding tables from a report");
    plot->add_option("report", report_path)->required();
    plot->add_option("--bin-width", bin_width);
    plot->add_flag("--no-embeddings", no_embeddings, "Only write the histogram");

    auto* synth = app.add_subcommand("synth", "Write the planted-anomaly benchmark in TUDataset layout");
    synth->add_option("dir", dir)->required();
    synth->add_option("--seed", synth_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ErrorKind::configuration);
    }

    try {
        if (*prepare) return cmd_prepare(dir, name, common);
        if (*train) return cmd_train(config_path, phase, variant, common);
        if (*eval) return cmd_eval(config_path, variant, common);
        if (*plot) return cmd_plotdata(report_path, bin_width, !no_embeddings, common);
        if (*synth) return cmd_synth(dir, synth_seed);
    } catch (const TrainingFault& e) {
        std::fprintf(stderr, "numeric fault: %s\n", e.what());
        return static_cast<int>(e.kind());
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return static_cast<int>(ErrorKind::contract);
    }
    return 0;
}
