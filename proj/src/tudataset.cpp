#include "fanfold/tudataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fanfold/errors.hpp"
#include "fanfold/hash.hpp"
#include "fanfold/random.hpp"

namespace fanfold {

namespace {

namespace fs = std::filesystem;

struct Line {
    std::size_t number;
    std::string_view text;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

class TextFile {
public:
    explicit TextFile(const fs::path& path) : path_(path.string()) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ParseError(path_, 0, "cannot open file");
        std::ostringstream ss;
        ss << in.rdbuf();
        content_ = ss.str();
        std::size_t number = 0;
        std::string_view rest = content_;
        while (!rest.empty()) {
            const auto nl = rest.find('\n');
            std::string_view raw = rest.substr(0, nl);
            ++number;
            const auto t = trim(raw);
            if (!t.empty()) lines_.push_back({number, t});
            if (nl == std::string_view::npos) break;
            rest.remove_prefix(nl + 1);
        }
    }

    const std::string& path() const { return path_; }
    const std::vector<Line>& lines() const { return lines_; }

private:
    std::string path_;
    std::string content_;
    std::vector<Line> lines_;
};

std::vector<std::string_view> split_fields(std::string_view s) {
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = s.find(',');
        out.push_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

long long parse_int(std::string_view token, const TextFile& file, std::size_t line) {
    long long v = 0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc() || ptr != end || token.empty()) {
        throw ParseError(file.path(), line, "expected integer, got '" + std::string(token) + "'");
    }
    return v;
}

double parse_real(std::string_view token, const TextFile& file, std::size_t line) {
    double v = 0.0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc() || ptr != end || token.empty()) {
        throw ParseError(file.path(), line, "expected number, got '" + std::string(token) + "'");
    }
    return v;
}

fs::path resolve_dir(const fs::path& directory, const std::string& name) {
    if (fs::exists(directory / (name + "_A.txt")) || fs::exists(directory / (name + "_graph_indicator.txt"))) {
        return directory;
    }
    if (fs::is_directory(directory / name)) return directory / name;
    return directory;
}

fs::path mandatory(const fs::path& dir, const std::string& name, const std::string& suffix) {
    fs::path p = dir / (name + suffix);
    if (!fs::exists(p)) throw ParseError(p.string(), 0, "missing mandatory dataset file");
    return p;
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

GraphSet parse_tudataset(const fs::path& directory, const std::string& name) {
    const fs::path dir = resolve_dir(directory, name);
    const TextFile edges_file(mandatory(dir, name, "_A.txt"));
    const TextFile indicator_file(mandatory(dir, name, "_graph_indicator.txt"));
    const TextFile labels_file(mandatory(dir, name, "_graph_labels.txt"));

    // Graph labels fix the graph count.
    std::vector<int> graph_labels;
    for (const auto& line : labels_file.lines()) {
        graph_labels.push_back(static_cast<int>(parse_int(line.text, labels_file, line.number)));
    }
    const std::size_t graph_count = graph_labels.size();
    if (graph_count == 0) throw ParseError(labels_file.path(), 0, "no graph labels");

    // Node -> (graph, local index).
    std::vector<std::size_t> node_graph;
    std::vector<std::size_t> node_local;
    std::vector<std::size_t> sizes(graph_count, 0);
    for (const auto& line : indicator_file.lines()) {
        const long long gid = parse_int(line.text, indicator_file, line.number);
        if (gid < 1 || static_cast<std::size_t>(gid) > graph_count) {
            throw ParseError(indicator_file.path(), line.number,
                             "graph id " + std::to_string(gid) + " outside 1.." + std::to_string(graph_count));
        }
        const auto g = static_cast<std::size_t>(gid - 1);
        node_graph.push_back(g);
        node_local.push_back(sizes[g]++);
    }
    const std::size_t total_nodes = node_graph.size();
    for (std::size_t g = 0; g < graph_count; ++g) {
        if (sizes[g] == 0) throw ParseError(indicator_file.path(), 0, "graph " + std::to_string(g + 1) + " has no nodes");
    }

    // Node labels -> one-hot, one block per label column.
    std::vector<std::vector<long long>> node_labels;
    std::vector<std::vector<long long>> label_vocab;
    if (fs::path p = dir / (name + "_node_labels.txt"); fs::exists(p)) {
        const TextFile f(p);
        if (f.lines().size() != total_nodes) {
            throw ParseError(f.path(), 0,
                             "expected " + std::to_string(total_nodes) + " node labels, found " +
                                 std::to_string(f.lines().size()));
        }
        for (const auto& line : f.lines()) {
            std::vector<long long> row;
            for (auto tok : split_fields(line.text)) row.push_back(parse_int(tok, f, line.number));
            if (!node_labels.empty() && row.size() != node_labels.front().size()) {
                throw ParseError(f.path(), line.number, "inconsistent number of node label columns");
            }
            node_labels.push_back(std::move(row));
        }
        const std::size_t columns = node_labels.front().size();
        label_vocab.resize(columns);
        for (std::size_t c = 0; c < columns; ++c) {
            std::set<long long> values;
            for (const auto& row : node_labels) values.insert(row[c]);
            label_vocab[c].assign(values.begin(), values.end());
        }
    }

    std::vector<std::vector<double>> node_attrs;
    if (fs::path p = dir / (name + "_node_attributes.txt"); fs::exists(p)) {
        const TextFile f(p);
        if (f.lines().size() != total_nodes) {
            throw ParseError(f.path(), 0,
                             "expected " + std::to_string(total_nodes) + " attribute rows, found " +
                                 std::to_string(f.lines().size()));
        }
        for (const auto& line : f.lines()) {
            std::vector<double> row;
            for (auto tok : split_fields(line.text)) row.push_back(parse_real(tok, f, line.number));
            if (!node_attrs.empty() && row.size() != node_attrs.front().size()) {
                throw ParseError(f.path(), line.number, "inconsistent number of attribute columns");
            }
            node_attrs.push_back(std::move(row));
        }
    }

    std::size_t onehot_dim = 0;
    for (const auto& v : label_vocab) onehot_dim += v.size();
    const std::size_t attr_dim = node_attrs.empty() ? 0 : node_attrs.front().size();
    const std::size_t feature_dim = onehot_dim + attr_dim;

    GraphSet set;
    set.name = name;
    set.graphs.resize(graph_count);
    for (std::size_t g = 0; g < graph_count; ++g) {
        set.graphs[g].label = graph_labels[g];
        set.graphs[g].adjacency = Tensor(sizes[g], sizes[g]);
        set.graphs[g].features = Tensor(sizes[g], feature_dim);
    }

    for (std::size_t v = 0; v < total_nodes; ++v) {
        Tensor& x = set.graphs[node_graph[v]].features;
        const std::size_t r = node_local[v];
        std::size_t offset = 0;
        if (!node_labels.empty()) {
            for (std::size_t c = 0; c < label_vocab.size(); ++c) {
                const auto& vocab = label_vocab[c];
                const auto pos = std::lower_bound(vocab.begin(), vocab.end(), node_labels[v][c]) - vocab.begin();
                x(r, offset + static_cast<std::size_t>(pos)) = 1.0;
                offset += vocab.size();
            }
        }
        for (std::size_t c = 0; c < attr_dim; ++c) x(r, offset + c) = node_attrs[v][c];
    }

    for (const auto& line : edges_file.lines()) {
        const auto fields = split_fields(line.text);
        if (fields.size() != 2) {
            throw ParseError(edges_file.path(), line.number, "expected two comma-separated node ids");
        }
        const long long u = parse_int(fields[0], edges_file, line.number);
        const long long w = parse_int(fields[1], edges_file, line.number);
        for (long long id : {u, w}) {
            if (id < 1 || static_cast<std::size_t>(id) > total_nodes) {
                throw ParseError(edges_file.path(), line.number,
                                 "node id " + std::to_string(id) + " outside 1.." + std::to_string(total_nodes));
            }
        }
        const auto a = static_cast<std::size_t>(u - 1);
        const auto b = static_cast<std::size_t>(w - 1);
        if (node_graph[a] != node_graph[b]) {
            throw ParseError(edges_file.path(), line.number,
                             "edge (" + std::to_string(u) + ", " + std::to_string(w) + ") crosses graphs " +
                                 std::to_string(node_graph[a] + 1) + " and " + std::to_string(node_graph[b] + 1));
        }
        Tensor& adj = set.graphs[node_graph[a]].adjacency;
        adj(node_local[a], node_local[b]) = 1.0;
        adj(node_local[b], node_local[a]) = 1.0;
    }

    std::set<int> vocab(graph_labels.begin(), graph_labels.end());
    set.label_vocabulary.assign(vocab.begin(), vocab.end());
    return set;
}

void write_tudataset(const GraphSet& set, const fs::path& directory) {
    fs::create_directories(directory);
    const std::string& name = set.name;
    std::ofstream edges(directory / (name + "_A.txt"));
    std::ofstream indicator(directory / (name + "_graph_indicator.txt"));
    std::ofstream labels(directory / (name + "_graph_labels.txt"));
    std::ofstream attrs;
    const bool has_attrs = set.feature_dim() > 0;
    if (has_attrs) attrs.open(directory / (name + "_node_attributes.txt"));

    std::size_t base = 1;
    for (std::size_t g = 0; g < set.graphs.size(); ++g) {
        const Graph& graph = set.graphs[g];
        const std::size_t n = graph.node_count();
        labels << graph.label << '\n';
        for (std::size_t i = 0; i < n; ++i) {
            indicator << (g + 1) << '\n';
            if (has_attrs) {
                for (std::size_t c = 0; c < graph.feature_dim(); ++c) {
                    if (c) attrs << ", ";
                    attrs << format_real(graph.features(i, c));
                }
                attrs << '\n';
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (graph.adjacency(i, j) != 0.0) edges << (base + i) << ", " << (base + j) << '\n';
            }
        }
        base += n;
    }
    if (!edges || !indicator || !labels || (has_attrs && !attrs)) {
        throw ParseError(directory.string(), 0, "failed writing dataset files");
    }
}

nlohmann::json graphset_to_json(const GraphSet& set) {
    nlohmann::json graphs = nlohmann::json::array();
    for (const auto& g : set.graphs) {
        nlohmann::json edges = nlohmann::json::array();
        for (std::size_t i = 0; i < g.node_count(); ++i)
            for (std::size_t j = i; j < g.node_count(); ++j)
                if (g.adjacency(i, j) != 0.0) edges.push_back({i, j});
        nlohmann::json features = nlohmann::json::array();
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            auto row = g.features.row(i);
            features.push_back(std::vector<double>(row.begin(), row.end()));
        }
        graphs.push_back({{"n", g.node_count()}, {"edges", edges}, {"features", features}, {"label", g.label}});
    }
    return {{"name", set.name}, {"graphs", graphs}};
}

GraphSet graphset_from_json(const nlohmann::json& doc) {
    GraphSet set;
    set.name = doc.at("name").get<std::string>();
    std::set<int> vocab;
    for (const auto& jg : doc.at("graphs")) {
        Graph g;
        const auto n = jg.at("n").get<std::size_t>();
        g.label = jg.at("label").get<int>();
        g.adjacency = Tensor(n, n);
        for (const auto& e : jg.at("edges")) {
            const auto i = e.at(0).get<std::size_t>();
            const auto j = e.at(1).get<std::size_t>();
            if (i >= n || j >= n) throw ContractError("edge index out of range in graph JSON");
            g.adjacency(i, j) = g.adjacency(j, i) = 1.0;
        }
        const auto& rows = jg.at("features");
        const std::size_t d = rows.empty() ? 0 : rows.at(0).size();
        g.features = Tensor(n, d);
        for (std::size_t i = 0; i < rows.size() && i < n; ++i)
            for (std::size_t c = 0; c < d; ++c) g.features(i, c) = rows.at(i).at(c).get<double>();
        vocab.insert(g.label);
        set.graphs.push_back(std::move(g));
    }
    set.label_vocabulary.assign(vocab.begin(), vocab.end());
    return set;
}

std::string dataset_fingerprint(const GraphSet& set) { return fingerprint(graphset_to_json(set).dump()); }

GraphSet subsample(const GraphSet& set, std::size_t max_graphs, std::uint64_t seed) {
    if (max_graphs == 0 || max_graphs >= set.size()) return set;
    std::vector<std::size_t> order(set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    order.resize(max_graphs);
    std::sort(order.begin(), order.end());
    GraphSet out;
    out.name = set.name;
    std::set<int> vocab;
    for (std::size_t i : order) {
        out.graphs.push_back(set.graphs[i]);
        vocab.insert(set.graphs[i].label);
    }
    out.label_vocabulary.assign(vocab.begin(), vocab.end());
    return out;
}

}  // namespace fanfold
