#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fanfold/errors.hpp"
#include "fanfold/synthetic.hpp"
#include "fanfold/tudataset.hpp"

using namespace fanfold;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "fanfold_cli_test";

struct Outcome {
    int code;
    std::string out;
};

Outcome run(const std::string& args) {
    const fs::path log = kWork / "last.log";
    const std::string cmd = "cd " + kWork.string() + " && " + FANFOLD_CLI + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_config(const fs::path& path, const std::string& extra = "") {
    std::ofstream(path) << "dataset = PLANTED\ndata_dir = data\nnormal_class = 0\ntest_fraction = 0.2\nseeds = 0, 1\n"
                           "s_epochs = 10\nn_epochs = 10\nt_epochs = 10\nk_se = 8\n"
                        << extra;
}

struct Workspace {
    Workspace() {
        fs::remove_all(kWork);
        fs::create_directories(kWork);
        write_config(kWork / "planted.conf");
    }
};

}  // namespace

TEST_CASE("prepare") {
    Workspace ws;
    Outcome o = run(std::string("prepare ") + FANFOLD_FIXTURE_DIR + " TINY --out-dir dump");
    CHECK(o.code == 0);
    CHECK(o.out.find("2 graphs") != std::string::npos);
    CHECK(fs::exists(kWork / "dump" / "TINY.json"));

    o = run(std::string("prepare ") + FANFOLD_FIXTURE_DIR + " NO_INDICATOR");
    CHECK(o.code == static_cast<int>(ErrorKind::parse));
    CHECK(o.out.find("NO_INDICATOR_graph_indicator.txt") != std::string::npos);
}

TEST_CASE("phased training, eval, determinism and plot data") {
    Workspace ws;
    REQUIRE(run("synth data").code == 0);

    Outcome o = run("train planted.conf --phase flow --out-dir r");
    CHECK(o.code == static_cast<int>(ErrorKind::phase_order));
    CHECK(o.out.find("encoder.ckpt") != std::string::npos);

    REQUIRE(run("train planted.conf --phase all --out-dir r").code == 0);
    for (const char* f : {"encoder.ckpt", "flow.ckpt", "target.ckpt", "loss_source.csv", "loss_flow.csv", "loss_target.csv"})
        CHECK(fs::exists(kWork / "r" / "0" / f));
    CHECK(fs::exists(kWork / "r" / "report.json"));
    CHECK(fs::exists(kWork / "r" / "scores.csv"));
    const std::string first_loss = slurp(kWork / "r" / "1" / "loss_target.csv");
    const auto first_report = nlohmann::json::parse(slurp(kWork / "r" / "report.json"));

    REQUIRE(run("train planted.conf --phase all --out-dir r").code == 0);
    CHECK(slurp(kWork / "r" / "1" / "loss_target.csv") == first_loss);
    auto second_report = nlohmann::json::parse(slurp(kWork / "r" / "report.json"));
    auto strip = [](nlohmann::json j) {
        j.erase("timing");
        return j.dump();
    };
    CHECK(strip(second_report) == strip(first_report));

    o = run("eval planted.conf --out-dir r");
    CHECK(o.code == 0);
    CHECK(o.out.find("PLANTED") != std::string::npos);
    CHECK(o.out.find("±") != std::string::npos);
    CHECK(strip(nlohmann::json::parse(slurp(kWork / "r" / "report.json"))) == strip(first_report));

    o = run("train planted.conf --phase source --out-dir p");
    CHECK(o.code == 0);
    CHECK(run("train planted.conf --phase flow --out-dir p").code == 0);
    CHECK(run("train planted.conf --phase target --out-dir p").code == 0);
    CHECK(run("eval planted.conf --out-dir p").code == 0);
    CHECK(strip(nlohmann::json::parse(slurp(kWork / "p" / "report.json"))) == strip(first_report));

    o = run("plotdata r/report.json");
    CHECK(o.code == 0);
    CHECK(fs::exists(kWork / "r" / "histogram.csv"));
    CHECK(fs::exists(kWork / "r" / "embeddings_flow_seed0.csv"));
    CHECK(slurp(kWork / "r" / "histogram.csv").rfind("# manifest " + first_report["manifest"]["hash"].get<std::string>(), 0) == 0);

    o = run("eval planted.conf --out-dir nowhere --seed-override 5");
    CHECK(o.code == static_cast<int>(ErrorKind::phase_order));
    CHECK(o.out.find("5") != std::string::npos);
}

TEST_CASE("variant flag and error codes") {
    Workspace ws;
    REQUIRE(run("synth data").code == 0);
    REQUIRE(run("train planted.conf --variant non_st --seed-override 0 --out-dir ns").code == 0);
    const auto report = nlohmann::json::parse(slurp(kWork / "ns" / "report.json"));
    CHECK(report["variant"] == "non_st");
    CHECK(report["seeds"].size() == 1);

    CHECK(run("train planted.conf --variant bogus").code == static_cast<int>(ErrorKind::configuration));
    write_config(kWork / "bad.conf", "colour = blue\n");
    CHECK(run("train bad.conf").code == static_cast<int>(ErrorKind::configuration));
    CHECK(run("frobnicate").code == static_cast<int>(ErrorKind::configuration));

    std::ofstream(kWork / "empty.json") << R"({"dataset":"X","variant":"full","normal_class":0,
        "manifest":{"hash":"0","config":""},"config_fingerprint":"","dataset_fingerprint":"",
        "auc":{"mean":0,"std":0},"seeds":[]})";
    CHECK(run("plotdata empty.json").code != 0);

    // only normal graphs: every test set is single-class
    GraphSet set = make_planted_anomaly_set(SyntheticSpec{}, 0);
    GraphSet normals;
    normals.name = "NORMALS";
    for (const auto& g : set.graphs)
        if (g.label == 0) normals.graphs.push_back(g);
    normals.label_vocabulary = {0};
    write_tudataset(normals, kWork / "data");
    std::ofstream(kWork / "normals.conf") << "dataset = NORMALS\nnormal_class = 0\nseeds = 0\ns_epochs = 2\n"
                                             "n_epochs = 2\nt_epochs = 2\n";
    const Outcome o = run("train normals.conf --out-dir nn");
    CHECK(o.code == static_cast<int>(ErrorKind::undefined_metric));
}
