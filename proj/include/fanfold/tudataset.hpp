#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "fanfold/graph.hpp"

namespace fanfold {

// Reads the TUDataset text layout from `directory`:
//   <name>_A.txt                comma-separated 1-based edge endpoints (mandatory)
//   <name>_graph_indicator.txt  graph id per node, 1-based (mandatory)
//   <name>_graph_labels.txt     class label per graph (mandatory)
//   <name>_node_labels.txt      integer label(s) per node, one-hot encoded (optional)
//   <name>_node_attributes.txt  comma-separated reals per node (optional)
// The loader also accepts a <directory>/<name>/ subfolder, which is how the
// archives unpack.
//
// Edges are symmetrized and deduplicated; self-loops are kept.
GraphSet parse_tudataset(const std::filesystem::path& directory, const std::string& name);

// Writes `set` back out in the same layout. Features go to
// <name>_node_attributes.txt; no node label file is written.
void write_tudataset(const GraphSet& set, const std::filesystem::path& directory);

// Canonical dump: {"name", "graphs": [{"n", "edges": [[i, j], ...] with i <= j,
// "features": [[...], ...], "label"}]}. Indices are 0-based per graph.
nlohmann::json graphset_to_json(const GraphSet& set);
GraphSet graphset_from_json(const nlohmann::json& doc);

// Hash of the canonical dump.
std::string dataset_fingerprint(const GraphSet& set);

// Keeps at most `max_graphs` graphs, chosen by a seeded shuffle and kept in
// original order. max_graphs == 0 keeps everything.
GraphSet subsample(const GraphSet& set, std::size_t max_graphs, std::uint64_t seed);

}  // namespace fanfold
