#include <doctest.h>

#include <filesystem>
#include <set>

#include "fanfold/errors.hpp"
#include "fanfold/features.hpp"
#include "fanfold/graph.hpp"
#include "fanfold/tudataset.hpp"
#include "support.hpp"

using namespace fanfold;
using namespace fanfold::testing;
namespace fs = std::filesystem;

static const fs::path kFixtures = FANFOLD_FIXTURE_DIR;

TEST_CASE("TINY fixture parses to two graphs") {
    const GraphSet set = parse_tudataset(kFixtures, "TINY");
    REQUIRE(set.size() == 2);
    CHECK(set.label_vocabulary == std::vector<int>{-1, 1});
    const Graph& g0 = set.graphs[0];
    const Graph& g1 = set.graphs[1];
    CHECK(g0.node_count() == 3);
    CHECK(g1.node_count() == 2);
    CHECK(g0.label == 1);
    CHECK(g1.label == -1);
    // 1-2 listed twice, 2-3 once, 3-3 self loop
    CHECK(g0.adjacency == Tensor::from_rows({{0, 1, 0}, {1, 0, 1}, {0, 1, 1}}));
    CHECK(g0.edge_count() == 3);
    CHECK(g1.adjacency == Tensor::from_rows({{0, 1}, {1, 0}}));
    // labels {0,1,2} one-hot, then the two attributes
    REQUIRE(set.feature_dim() == 5);
    CHECK(g0.features == Tensor::from_rows({{1, 0, 0, 0.5, 1.0}, {0, 0, 1, -1.5, 2.0}, {1, 0, 0, 0.0, 0.0}}));
    CHECK(g1.features == Tensor::from_rows({{0, 1, 0, 3.25, -1.0}, {0, 1, 0, 1.0, 1.0}}));
    CHECK(set.average_nodes() == doctest::Approx(2.5));
    CHECK(set.average_edges() == doctest::Approx(2.0));
}

TEST_CASE("parser error paths name the file and line") {
    SUBCASE("missing indicator") {
        try {
            parse_tudataset(kFixtures, "NO_INDICATOR");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("NO_INDICATOR_graph_indicator.txt") != std::string::npos);
        }
    }
    SUBCASE("edge across graphs") {
        try {
            parse_tudataset(kFixtures, "BROKEN_EDGE");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("bad token") {
        try {
            parse_tudataset(kFixtures, "BAD_TOKEN");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
            CHECK(std::string(e.what()).find("BAD_TOKEN_A.txt") != std::string::npos);
        }
    }
    SUBCASE("absent dataset") { CHECK_THROWS_AS(parse_tudataset(kFixtures, "NOPE"), ParseError); }
}

TEST_CASE("write then parse round-trips the canonical form") {
    const GraphSet set = parse_tudataset(kFixtures, "TINY");
    const fs::path dir = fs::temp_directory_path() / "fanfold_roundtrip";
    fs::remove_all(dir);
    write_tudataset(set, dir);
    const GraphSet back = parse_tudataset(dir, "TINY");
    CHECK(graphset_to_json(back) == graphset_to_json(set));
    CHECK(dataset_fingerprint(back) == dataset_fingerprint(set));
    CHECK(graphset_to_json(graphset_from_json(graphset_to_json(set))) == graphset_to_json(set));

    Rng rng(2);
    GraphSet random_set;
    random_set.name = "RAND";
    for (int k = 0; k < 6; ++k) {
        Graph g = random_graph(3 + rng.below(6), 0.3, 3, rng);
        g.label = k % 2;
        random_set.graphs.push_back(g);
    }
    random_set.label_vocabulary = {0, 1};
    write_tudataset(random_set, dir);
    CHECK(graphset_to_json(parse_tudataset(dir, "RAND")) == graphset_to_json(random_set));
}

TEST_CASE("normalized adjacency of a path matches the hand computation") {
    Graph g;
    g.adjacency = Tensor::from_rows({{0, 1, 0}, {1, 0, 1}, {0, 1, 0}});
    g.features = Tensor(3, 0);
    const Tensor a = normalized_adjacency(g);
    // degrees with self loops: 2, 3, 2
    CHECK(a(0, 0) == doctest::Approx(0.5));
    CHECK(a(1, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(a(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)));
    CHECK(a(0, 2) == 0.0);
    CHECK(a(1, 2) == doctest::Approx(a(2, 1)));
}

TEST_CASE("anomaly split keeps anomalies out of training") {
    GraphSet set;
    for (int k = 0; k < 40; ++k) {
        Graph g;
        g.adjacency = Tensor(2, 2);
        g.features = Tensor(2, 0);
        g.label = k % 4 == 0 ? 1 : 0;
        set.graphs.push_back(g);
    }
    set.label_vocabulary = {0, 1};
    const AnomalySplit s = make_anomaly_split(set, 0, 0.2, 3);
    // 30 normals, llround(0.2 * 30) = 6 held out
    CHECK(s.train.size() == 24);
    CHECK(s.test.size() == 16);
    CHECK(s.anomaly_count() == 10);
    std::set<std::size_t> train(s.train.begin(), s.train.end());
    for (std::size_t k = 0; k < s.test.size(); ++k) {
        CHECK(train.count(s.test[k]) == 0);
        CHECK((set.graphs[s.test[k]].label == 1) == (s.test_is_anomaly[k] != 0));
    }
    for (std::size_t idx : s.train) CHECK(set.graphs[idx].label == 0);
    CHECK(make_anomaly_split(set, 0, 0.2, 3).train == s.train);
    CHECK(make_anomaly_split(set, 0, 0.2, 4).train != s.train);
    CHECK_THROWS_AS(make_anomaly_split(set, 7, 0.2, 3), ConfigError);
    CHECK_THROWS_AS(make_anomaly_split(set, 0, 1.0, 3), ConfigError);
}

TEST_CASE("split of ten graphs with class 1 as normal") {
    GraphSet set;
    for (int k = 0; k < 10; ++k) {
        Graph g;
        g.adjacency = Tensor(1, 1);
        g.features = Tensor(1, 0);
        g.label = k < 5 ? 1 : 0;
        set.graphs.push_back(g);
    }
    set.label_vocabulary = {0, 1};
    const AnomalySplit s = make_anomaly_split(set, 1, 0.2, 0);
    CHECK(s.train.size() == 4);
    CHECK(s.test.size() == 6);
    CHECK(s.anomaly_count() == 5);
    for (std::size_t idx : s.train) CHECK(set.graphs[idx].label == 1);
}

TEST_CASE("random-walk encoding equals the diagonal of dense transition powers") {
    Rng rng(8);
    for (int rep = 0; rep < 5; ++rep) {
        const Graph g = random_graph(4 + rng.below(6), 0.3, 0, rng);
        const std::size_t n = g.node_count(), k = 6;
        Tensor m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            double deg = 0.0;
            for (std::size_t j = 0; j < n; ++j) deg += g.adjacency(i, j);
            for (std::size_t j = 0; j < n; ++j) m(i, j) = deg > 0 ? g.adjacency(i, j) / deg : 0.0;
        }
        const StructuralEncoding se = rw_structural_encoding(g, k);
        Tensor power = m;
        for (std::size_t t = 0; t < k; ++t) {
            for (std::size_t i = 0; i < n; ++i) CHECK(se.matrix(i, t) == doctest::Approx(power(i, i)).epsilon(1e-12));
            power = naive_matmul(power, m);
        }
    }
}

TEST_CASE("random-walk encoding on small closed forms") {
    Graph c4;
    c4.adjacency = Tensor::from_rows({{0, 1, 0, 1}, {1, 0, 1, 0}, {0, 1, 0, 1}, {1, 0, 1, 0}});
    c4.features = Tensor(4, 0);
    const StructuralEncoding se = rw_structural_encoding(c4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(se.matrix(i, 0) == 0.0);
        CHECK(se.matrix(i, 1) == doctest::Approx(0.5));
        CHECK(se.matrix(i, 2) == 0.0);
        CHECK(se.matrix(i, 3) == doctest::Approx(0.5));
    }
    Graph lone;
    lone.adjacency = Tensor(1, 1);
    lone.features = Tensor(1, 2, 1.0);
    CHECK(frobenius_sq(rw_structural_encoding(lone, 3).matrix) == 0.0);
    CHECK_THROWS_AS(rw_structural_encoding(lone, 0), ContractError);
    const InitFeatures init = build_init_features(lone, rw_structural_encoding(lone, 3));
    CHECK(init.matrix.cols() == 5);
    CHECK(init.attr_dim == 2);
}

TEST_CASE("structural encoding is permutation equivariant") {
    Rng rng(12);
    const Graph g = random_graph(7, 0.35, 2, rng);
    std::vector<std::size_t> order{3, 0, 6, 1, 5, 2, 4};
    const Graph p = permute_nodes(g, order);
    const Tensor a = rw_structural_encoding(g, 5).matrix;
    const Tensor b = rw_structural_encoding(p, 5).matrix;
    CHECK(max_abs_diff(select_rows(a, order), b) < 1e-12);
}

TEST_CASE("subsample is seeded and order preserving") {
    GraphSet set;
    for (int k = 0; k < 20; ++k) {
        Graph g;
        g.adjacency = Tensor(1, 1);
        g.features = Tensor(1, 1, static_cast<double>(k));
        set.graphs.push_back(g);
    }
    set.label_vocabulary = {0};
    const GraphSet a = subsample(set, 5, 1), b = subsample(set, 5, 1);
    REQUIRE(a.size() == 5);
    CHECK(graphset_to_json(a) == graphset_to_json(b));
    for (std::size_t k = 1; k < a.size(); ++k) CHECK(a.graphs[k - 1].features(0, 0) < a.graphs[k].features(0, 0));
    CHECK(subsample(set, 0, 1).size() == 20);
}
