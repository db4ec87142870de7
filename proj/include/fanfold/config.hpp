#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fanfold/target_network.hpp"

namespace fanfold {

enum class Variant { full, non_st, asy_st, non_nf };

std::string to_string(Variant v);
Variant parse_variant(const std::string& text);

// Every knob of one experiment. Defaults follow the documented settings; the
// config file format is flat `key = value` lines with `#` comments.
struct ExperimentConfig {
    std::string dataset;
    std::filesystem::path data_dir = "data";
    // nullopt = resolve from config/dataset_defaults.txt or the majority class
    std::optional<int> normal_class;
    double test_fraction = 0.15;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::size_t max_graphs = 0;  // 0 = whole dataset

    double alpha = 0.7;
    double beta = 0.6;
    std::size_t gcn_layers = 2;
    std::size_t hidden_dim = 16;
    std::size_t embed_dim = 16;
    std::size_t mp_steps = 2;
    double s_max = 2.0;
    std::size_t k_se = 16;
    bool degree_feature = false;
    std::size_t gin_layers = 2;

    std::size_t s_epochs = 100;
    std::size_t n_epochs = 100;
    std::size_t t_epochs = 100;
    double lr = 1e-3;
    std::size_t batch_size = 1;

    Variant variant = Variant::full;
    DistanceKind distance = DistanceKind::cosine;
    ReadoutKind readout = ReadoutKind::max;

    // Throws ConfigError on any violated invariant.
    void validate() const;
    // Canonical `key = value` text (seeds excluded) and its hash. Checkpoints
    // embed the hash.
    std::string canonical_text() const;
    std::string fingerprint() const;
};

// Parses `key = value` text. Unknown keys are an error.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

// `name = normal_class` lines; `majority` means "most frequent class".
std::map<std::string, std::string> load_dataset_defaults(const std::filesystem::path& path);

}  // namespace fanfold
