#pragma once

#include "arc/dataset/index.hpp"
#include "arc/preprocess/pipeline.hpp"
#include "arc/training/trainer.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace arc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `arc` tool. args[0] is the program name. Diagnostics
/// go to stderr, machine-readable results to stdout.
int run(const std::vector<std::string>& args);

/// Everything `arc train` needs, resolved from a key-value file and flags.
struct TrainSettings {
    std::string root;      ///< corpus root
    std::string catalog;   ///< default: <root>/catalog.json
    std::string manifest;  ///< default: <root>/manifest.csv; created by splitting when missing
    std::string cache_dir; ///< default: <root>/.cache; "none" disables
    std::string pipeline;  ///< optional JSON pipeline configuration file
    unsigned threads = 0;  ///< loader workers; 0 = hardware concurrency
    dataset::SplitFractions fractions;
    double dropout = 0.1;
    training::TrainConfig train;

    /// Applies one `key = value` setting. Unknown keys raise ConfigError.
    void set(const std::string& key, const std::string& value);
    void set_all(const std::map<std::string, std::string>& kv);
    /// Fills defaults that depend on other fields and validates.
    void finalize();
    nlohmann::json to_json() const;
};

}  // namespace arc::cli
