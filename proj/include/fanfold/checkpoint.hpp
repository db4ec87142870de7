#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fanfold/graph_flow.hpp"
#include "fanfold/source_network.hpp"
#include "fanfold/target_network.hpp"

namespace fanfold {

// On-disk checkpoint (JSON):
// {
//   "format": "fanfold-checkpoint/1",
//   "kind": "encoder" | "flow" | "target",
//   "config_fingerprint": "...", "dataset_fingerprint": "...", "seed": 7,
//   "upstream": {"encoder": "<fingerprint>", "flow": "<fingerprint>"},
//   "meta": {...architecture...},
//   "tensors": [{"name": "gcn.w0", "shape": [r, c], "values": [...row-major...]}, ...],
//   "fingerprint": "<hash of every field above>"
// }
// Doubles are written with round-trip precision, so load(save(x)) == x bitwise.
struct Checkpoint {
    std::string kind;
    std::string config_fingerprint;
    std::string dataset_fingerprint;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> upstream;
    nlohmann::json meta = nlohmann::json::object();
    std::vector<std::pair<std::string, Tensor>> tensors;

    // Hash over everything but the fingerprint field itself.
    std::string fingerprint() const;
    nlohmann::json to_json() const;
    static Checkpoint from_json(const nlohmann::json& doc);

    const Tensor& tensor(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Verifies the stored fingerprint against the content.
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct CheckpointContext {
    std::string config_fingerprint;
    std::string dataset_fingerprint;
    std::uint64_t seed = 0;
};

Checkpoint encoder_checkpoint(const SourceModel& model, const CheckpointContext& ctx);
SourceModel restore_source(const Checkpoint& ckpt);

Checkpoint flow_checkpoint(const FrozenFlow& flow, const Checkpoint& encoder, const CheckpointContext& ctx);
FrozenFlow restore_flow(const Checkpoint& ckpt);

// `flow` may be null for variants without a flow.
Checkpoint target_checkpoint(const TargetParams& params, const Checkpoint& encoder, const Checkpoint* flow,
                             const CheckpointContext& ctx);
TargetParams restore_target(const Checkpoint& ckpt);

// Throws PhaseOrderError unless `downstream.upstream[key]` equals
// `upstream.fingerprint()`.
void require_upstream(const Checkpoint& downstream, const std::string& key, const Checkpoint& upstream);
// Throws PhaseOrderError unless the checkpoint was made for this config,
// dataset and seed.
void require_context(const Checkpoint& ckpt, const CheckpointContext& ctx);

}  // namespace fanfold
