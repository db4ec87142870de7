#include "fanfold/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "fanfold/errors.hpp"
#include "fanfold/hash.hpp"

namespace fanfold {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::size_t to_size(const std::string& key, const std::string& v) {
    std::size_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
    }
    return out;
}

double to_real(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
    }
    return out;
}

int to_int(const std::string& key, const std::string& v) {
    int out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("'" + key + "' expects true/false, got '" + v + "'");
}

std::string real_text(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string to_string(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::non_st: return "non_st";
        case Variant::asy_st: return "asy_st";
        case Variant::non_nf: return "non_nf";
    }
    return "full";
}

Variant parse_variant(const std::string& text) {
    if (text == "full") return Variant::full;
    if (text == "non_st") return Variant::non_st;
    if (text == "asy_st") return Variant::asy_st;
    if (text == "non_nf") return Variant::non_nf;
    throw ConfigError("unknown variant '" + text + "' (expected full, non_st, asy_st or non_nf)");
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (key == "dataset") {
        c.dataset = value;
    } else if (key == "data_dir") {
        c.data_dir = value;
    } else if (key == "normal_class") {
        if (value == "auto" || value.empty()) {
            c.normal_class.reset();
        } else {
            c.normal_class = to_int(key, value);
        }
    } else if (key == "test_fraction") {
        c.test_fraction = to_real(key, value);
    } else if (key == "seeds") {
        c.seeds.clear();
        std::stringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (!tok.empty()) c.seeds.push_back(to_size(key, tok));
        }
    } else if (key == "max_graphs") {
        c.max_graphs = to_size(key, value);
    } else if (key == "alpha") {
        c.alpha = to_real(key, value);
    } else if (key == "beta") {
        c.beta = to_real(key, value);
    } else if (key == "gcn_layers") {
        c.gcn_layers = to_size(key, value);
    } else if (key == "hidden_dim") {
        c.hidden_dim = to_size(key, value);
    } else if (key == "embed_dim") {
        c.embed_dim = to_size(key, value);
    } else if (key == "mp_steps") {
        c.mp_steps = to_size(key, value);
    } else if (key == "s_max") {
        c.s_max = to_real(key, value);
    } else if (key == "k_se") {
        c.k_se = to_size(key, value);
    } else if (key == "degree_feature") {
        c.degree_feature = to_bool(key, value);
    } else if (key == "gin_layers") {
        c.gin_layers = to_size(key, value);
    } else if (key == "s_epochs") {
        c.s_epochs = to_size(key, value);
    } else if (key == "n_epochs") {
        c.n_epochs = to_size(key, value);
    } else if (key == "t_epochs") {
        c.t_epochs = to_size(key, value);
    } else if (key == "lr") {
        c.lr = to_real(key, value);
    } else if (key == "batch_size") {
        c.batch_size = to_size(key, value);
    } else if (key == "variant") {
        c.variant = parse_variant(value);
    } else if (key == "distance") {
        if (value == "cosine") {
            c.distance = DistanceKind::cosine;
        } else if (value == "sq_euclidean") {
            c.distance = DistanceKind::squared_euclidean;
        } else {
            throw ConfigError("unknown distance '" + value + "' (expected cosine or sq_euclidean)");
        }
    } else if (key == "readout") {
        if (value == "max") {
            c.readout = ReadoutKind::max;
        } else if (value == "mean") {
            c.readout = ReadoutKind::mean;
        } else {
            throw ConfigError("unknown readout '" + value + "' (expected max or mean)");
        }
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    ExperimentConfig c;
    std::stringstream ss(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(ss, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(number) + ": expected 'key = value'");
        }
        try {
            apply_setting(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

void ExperimentConfig::validate() const {
    if (dataset.empty()) throw ConfigError("config: 'dataset' is required");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("config: alpha must lie in [0, 1]");
    if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("config: beta must lie in [0, 1]");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("config: test_fraction must lie in (0, 1)");
    if (embed_dim == 0 || embed_dim % 2 != 0) {
        throw ConfigError("config: embed_dim must be even and positive (the flow splits it in half), got " +
                          std::to_string(embed_dim));
    }
    if (seeds.empty()) throw ConfigError("config: at least one seed is required");
    if (gcn_layers == 0 || gin_layers == 0) throw ConfigError("config: layer counts must be positive");
    if (hidden_dim == 0) throw ConfigError("config: hidden_dim must be positive");
    if (mp_steps == 0) throw ConfigError("config: mp_steps must be at least 1");
    if (k_se == 0) throw ConfigError("config: k_se must be at least 1");
    if (!(s_max > 0.0)) throw ConfigError("config: s_max must be positive");
    if (!(lr > 0.0)) throw ConfigError("config: lr must be positive");
    if (batch_size == 0) throw ConfigError("config: batch_size must be positive");
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream o;
    o << "dataset = " << dataset << '\n'
      << "normal_class = " << (normal_class ? std::to_string(*normal_class) : std::string("auto")) << '\n'
      << "test_fraction = " << real_text(test_fraction) << '\n'
      << "max_graphs = " << max_graphs << '\n'
      << "alpha = " << real_text(alpha) << '\n'
      << "beta = " << real_text(beta) << '\n'
      << "gcn_layers = " << gcn_layers << '\n'
      << "hidden_dim = " << hidden_dim << '\n'
      << "embed_dim = " << embed_dim << '\n'
      << "mp_steps = " << mp_steps << '\n'
      << "s_max = " << real_text(s_max) << '\n'
      << "k_se = " << k_se << '\n'
      << "degree_feature = " << (degree_feature ? "true" : "false") << '\n'
      << "gin_layers = " << gin_layers << '\n'
      << "s_epochs = " << s_epochs << '\n'
      << "n_epochs = " << n_epochs << '\n'
      << "t_epochs = " << t_epochs << '\n'
      << "lr = " << real_text(lr) << '\n'
      << "batch_size = " << batch_size << '\n'
      << "variant = " << to_string(variant) << '\n'
      << "distance = " << (distance == DistanceKind::cosine ? "cosine" : "sq_euclidean") << '\n'
      << "readout = " << (readout == ReadoutKind::max ? "max" : "mean") << '\n';
    return o.str();
}

std::string ExperimentConfig::fingerprint() const { return fanfold::fingerprint(canonical_text()); }

std::map<std::string, std::string> load_dataset_defaults(const std::filesystem::path& path) {
    std::map<std::string, std::string> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        const auto eq = line.find('=');
        if (line.empty() || eq == std::string::npos) continue;
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

}  // namespace fanfold
