// Acceptance runner: one PASS/FAIL/SKIP line per criterion.
//
//   fanfold_acceptance [criterion ...]   (no argument = all)
//
// Exit status for a single criterion: 0 pass, 1 fail, 77 skip (dataset not
// on disk). With several criteria the status is 1 if any failed, else 0.
// Datasets are read from $FANFOLD_DATA_DIR, falling back to <repo>/data.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fanfold/errors.hpp"
#include "fanfold/metrics.hpp"
#include "fanfold/pipeline.hpp"
#include "fanfold/synthetic.hpp"
#include "fanfold/tudataset.hpp"
#include "suites.hpp"

using namespace fanfold;
using namespace fanfold::testing;
namespace fs = std::filesystem;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
    Status status;
    std::string detail;
};

fs::path data_dir() {
    if (const char* env = std::getenv("FANFOLD_DATA_DIR"); env && *env) return env;
    return fs::path(FANFOLD_SOURCE_DIR) / "data";
}

bool dataset_present(const std::string& name) {
    for (const fs::path& base : {data_dir(), data_dir() / name})
        if (fs::exists(base / (name + "_A.txt"))) return true;
    return false;
}

ExperimentConfig reference_defaults(const std::string& dataset) {
    ExperimentConfig c;
    c.dataset = dataset;
    c.data_dir = data_dir();
    return c;  // struct defaults are the documented settings
}

std::map<std::string, std::string> defaults_table() {
    return load_dataset_defaults(fs::path(FANFOLD_SOURCE_DIR) / "config" / "dataset_defaults.txt");
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double minutes_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
}

Outcome missing(const std::string& name) {
    return {Status::skip, name + " not found under " + data_dir().string() +
                              " (set FANFOLD_DATA_DIR to a directory holding the TUDataset text files)"};
}

Outcome reproduction(const std::string& name, double floor, double budget_minutes, std::size_t max_graphs = 0) {
    if (!dataset_present(name)) return missing(name);
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c = reference_defaults(name);
    c.max_graphs = max_graphs;
    const PreparedDataset data = load_dataset(c, defaults_table());
    const ScoreReport r = run_experiment(c, data);
    const double minutes = minutes_since(t0);
    const bool ok = r.auc.mean >= floor && minutes < budget_minutes;
    return {ok ? Status::pass : Status::fail,
            fmt("%s%s mean AUC %.4f ± %.4f over %zu seeds (gate >= %.2f), %.1f min (budget %.0f)", name.c_str(),
                max_graphs ? fmt(" [%zu-graph subsample]", max_graphs).c_str() : "", r.auc.mean, r.auc.stddev,
                r.seeds.size(), floor, minutes, budget_minutes)};
}

Outcome aids_reproduction() { return reproduction("AIDS", 0.90, 30.0); }
Outcome bzr_reproduction() { return reproduction("BZR", 0.65, 10.0); }

Outcome dd_directional() {
    // the whole dataset only when asked; the documented fallback is a 300-graph subsample
    const bool full = std::getenv("FANFOLD_DD_FULL") != nullptr;
    return reproduction("DD", 0.70, 60.0, full ? 0 : 300);
}

Outcome ablation_direction() {
    if (!dataset_present("AIDS")) return missing("AIDS");
    ExperimentConfig c = reference_defaults("AIDS");
    const PreparedDataset data = load_dataset(c, defaults_table());
    std::map<Variant, double> auc;
    for (Variant v : {Variant::full, Variant::non_st, Variant::non_nf, Variant::asy_st}) {
        c.variant = v;
        auc[v] = run_experiment(c, data).auc.mean;
    }
    const double gap = auc[Variant::full] - auc[Variant::non_st];
    return {gap >= 0.05 ? Status::pass : Status::fail,
            fmt("AIDS full %.4f, non_st %.4f (gap %.4f, gate >= 0.05); reported only: non_nf %.4f, asy_st %.4f",
                auc[Variant::full], auc[Variant::non_st], gap, auc[Variant::non_nf], auc[Variant::asy_st])};
}

Outcome mp_step_trend() {
    if (!dataset_present("BZR")) return missing("BZR");
    ExperimentConfig c = reference_defaults("BZR");
    const PreparedDataset data = load_dataset(c, defaults_table());
    double auc[4] = {0, 0, 0, 0};
    for (std::size_t t : {1, 2, 3}) {
        c.mp_steps = t;
        auc[t] = run_experiment(c, data).auc.mean;
    }
    return {auc[2] >= auc[1] ? Status::pass : Status::fail,
            fmt("BZR mean AUC T=1 %.4f, T=2 %.4f (gate T=2 >= T=1); T=3 %.4f reported only", auc[1], auc[2], auc[3])};
}

Outcome from_suites(std::initializer_list<SuiteResult> parts) {
    Outcome o{Status::pass, ""};
    for (const auto& p : parts) {
        if (!p.pass) o.status = Status::fail;
        o.detail += (o.detail.empty() ? "" : "; ") + p.detail;
    }
    return o;
}

Outcome flow_correctness() {
    return from_suites({flow_round_trip_suite(101, 100), flow_logdet_suite(102, 50), flow_identity_suite(103)});
}

Outcome gradient_suite_criterion() { return from_suites({gradient_suite(201, 10)}); }

Outcome auc_oracle() {
    Rng rng(301);
    int mismatches = 0, ties = 0;
    for (int k = 0; k < 200; ++k) {
        const std::size_t m = 2 + rng.below(49);
        std::vector<double> scores(m);
        std::vector<std::uint8_t> flags(m);
        const std::uint64_t levels = 2 + rng.below(20);
        for (std::size_t i = 0; i < m; ++i) {
            scores[i] = static_cast<double>(rng.below(levels)) / static_cast<double>(levels);
            flags[i] = rng.below(2);
        }
        flags[0] = 1;
        flags[1] = 0;
        rng.shuffle(flags);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j)
                if (scores[i] == scores[j] && flags[i] != flags[j]) ++ties;
        if (compute_auc(scores, flags) != brute_force_auc(scores, flags)) ++mismatches;
    }
    return {mismatches == 0 ? Status::pass : Status::fail,
            fmt("%d/200 mismatches against the pairwise oracle (%d cross-class tied pairs)", mismatches, ties)};
}

// Runs every seed phase by phase and checks the guard after each run.
Outcome purity_check(const ExperimentConfig& c, const PreparedDataset& data, std::string& detail) {
    std::size_t touched = 0;
    for (std::uint64_t seed : c.seeds) {
        SeedRun run(c, data, seed);
        run.train_all();
        run.evaluate();
        for (std::size_t idx : run.split().test) {
            if (run.guard().seen().count(idx)) {
                detail = fmt("seed %llu: test graph %zu reached a trainer", static_cast<unsigned long long>(seed), idx);
                return {Status::fail, detail};
            }
        }
        run.guard().verify(run.split());
        touched += run.guard().seen().size();
    }
    detail = fmt("%s: %zu distinct graphs seen by trainers over %zu seeds, all from the training split", c.dataset.c_str(), touched,
                 c.seeds.size());
    return {Status::pass, detail};
}

Outcome protocol_purity() {
    ExperimentConfig syn;
    syn.dataset = "PLANTED";
    syn.normal_class = 0;
    syn.test_fraction = 0.2;
    const PreparedDataset planted = prepare_dataset(make_planted_anomaly_set(SyntheticSpec{}, 0), syn);
    std::string syn_detail;
    const Outcome s = purity_check(syn, planted, syn_detail);
    if (s.status == Status::fail) return s;
    if (!dataset_present("AIDS")) {
        Outcome o = missing("AIDS");
        o.detail = syn_detail + "; full AIDS run not possible: " + o.detail;
        return o;
    }
    const ExperimentConfig c = reference_defaults("AIDS");
    const PreparedDataset data = load_dataset(c, defaults_table());
    std::string detail;
    Outcome o = purity_check(c, data, detail);
    o.detail = syn_detail + "; " + detail;
    return o;
}

Outcome determinism() {
    std::vector<std::string> bodies;
    ExperimentConfig c;
    std::string which;
    std::optional<PreparedDataset> data;
    if (dataset_present("AIDS")) {
        c = reference_defaults("AIDS");
        data = load_dataset(c, defaults_table());
        which = "AIDS";
    } else {
        c.dataset = "PLANTED";
        c.normal_class = 0;
        c.test_fraction = 0.2;
        data = prepare_dataset(make_planted_anomaly_set(SyntheticSpec{}, 0), c);
        which = "planted set (AIDS not on disk)";
    }
    c.seeds = {7};
    const fs::path root = fs::temp_directory_path() / "fanfold_acceptance_determinism";
    fs::remove_all(root);
    for (int k = 0; k < 2; ++k) {
        const fs::path out = root / std::to_string(k);
        const ScoreReport r = run_experiment(c, *data, out, k == 0 ? 1 : 2);
        write_report(r, out);
        bodies.push_back(r.to_json(false).dump());
    }
    auto read = [](const fs::path& p) {
        std::FILE* f = std::fopen(p.c_str(), "rb");
        std::string s;
        if (!f) return s;
        char buf[4096];
        std::size_t n;
        while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) s.append(buf, n);
        std::fclose(f);
        return s;
    };
    bool files_equal = true;
    for (const char* f : {"7/encoder.ckpt", "7/flow.ckpt", "7/target.ckpt", "7/loss_source.csv", "7/loss_flow.csv",
                          "7/loss_target.csv", "scores.csv"})
        files_equal = files_equal && read(root / "0" / f) == read(root / "1" / f) && !read(root / "0" / f).empty();
    const bool same = bodies[0] == bodies[1];
    return {same && files_equal ? Status::pass : Status::fail,
            fmt("%s, seed 7, two runs: report bodies %s, checkpoints/loss/score files %s", which.c_str(),
                same ? "identical" : "DIFFER", files_equal ? "identical" : "DIFFER")};
}

Outcome parser_fidelity() {
    const fs::path fixtures = FANFOLD_FIXTURE_DIR;
    const fs::path tmp = fs::temp_directory_path() / "fanfold_acceptance_parser";
    fs::remove_all(tmp);
    auto round_trip = [&](const GraphSet& set) {
        write_tudataset(set, tmp);
        return graphset_to_json(parse_tudataset(tmp, set.name)) == graphset_to_json(set);
    };
    const GraphSet tiny = parse_tudataset(fixtures, "TINY");
    bool fixtures_ok = tiny.size() == 2 && tiny.graphs[0].node_count() == 3 && tiny.graphs[1].node_count() == 2 &&
                       tiny.feature_dim() == 5 && round_trip(tiny);
    for (const char* broken : {"NO_INDICATOR", "BROKEN_EDGE", "BAD_TOKEN"}) {
        try {
            parse_tudataset(fixtures, broken);
            fixtures_ok = false;
        } catch (const ParseError&) {
        }
    }
    const std::string fixture_detail = fmt("hand fixtures %s", fixtures_ok ? "ok" : "FAILED");
    if (!fixtures_ok) return {Status::fail, fixture_detail};
    if (!dataset_present("AIDS")) {
        Outcome o = missing("AIDS");
        o.detail = fixture_detail + "; AIDS statistics not checked: " + o.detail;
        return o;
    }
    const GraphSet aids = parse_tudataset(data_dir(), "AIDS");
    const double avg = aids.average_nodes();
    const bool stats = aids.size() == 2000 && std::abs(avg - 15.69) <= 0.01;
    const bool rt = round_trip(aids);
    return {stats && rt ? Status::pass : Status::fail,
            fixture_detail + fmt("; AIDS %zu graphs, avg nodes %.4f (want 2000, 15.69 ± 0.01), round trip %s",
                                 aids.size(), avg, rt ? "ok" : "FAILED")};
}

struct Criterion {
    const char* id;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all{
        {"aids_reproduction", aids_reproduction},
        {"bzr_reproduction", bzr_reproduction},
        {"dd_directional", dd_directional},
        {"ablation_direction", ablation_direction},
        {"flow_correctness", flow_correctness},
        {"gradient_suite", gradient_suite_criterion},
        {"auc_oracle", auc_oracle},
        {"protocol_purity", protocol_purity},
        {"determinism", determinism},
        {"parser_fidelity", parser_fidelity},
        {"mp_step_trend", mp_step_trend},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<const Criterion*> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string want = argv[i];
        const Criterion* found = nullptr;
        for (const auto& c : criteria())
            if (want == c.id) found = &c;
        if (!found) {
            std::fprintf(stderr, "unknown criterion '%s'; known:", want.c_str());
            for (const auto& c : criteria()) std::fprintf(stderr, " %s", c.id);
            std::fprintf(stderr, "\n");
            return 2;
        }
        selected.push_back(found);
    }
    if (selected.empty())
        for (const auto& c : criteria()) selected.push_back(&c);

    int failures = 0, skips = 0;
    for (const Criterion* c : selected) {
        Outcome o;
        try {
            o = c->run();
        } catch (const std::exception& e) {
            o = {Status::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
        std::printf("%s %s: %s\n", tag, c->id, o.detail.c_str());
        std::fflush(stdout);
        failures += o.status == Status::fail;
        skips += o.status == Status::skip;
    }
    if (failures) return 1;
    if (selected.size() == 1 && skips) return 77;
    return 0;
}
