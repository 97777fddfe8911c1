#pragma once

#include "arc/nn/network.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace arc::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Everything in a checkpoint besides the arrays.
struct CheckpointInfo {
    int epoch = 0;
    std::uint64_t seed = 0;
    nlohmann::json metrics = nlohmann::json::object();
    /// Free-form extras (preprocessing config, class names, ...).
    nlohmann::json extra = nlohmann::json::object();
};

struct LoadedCheckpoint {
    CheckpointInfo info;
    Network<float> network;
};

/// Layout: "ARCCKPT\0", u32 version, u64 metadata length, metadata JSON,
/// then every parameter and state array as little-endian float32 in
/// declaration order. All integers little-endian.
std::vector<std::uint8_t> encode_checkpoint(Network<float>& net, const CheckpointInfo& info);
LoadedCheckpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

/// Writes atomically (temp file + rename).
void save_checkpoint(const std::filesystem::path& path, Network<float>& net, const CheckpointInfo& info);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace arc::nn
