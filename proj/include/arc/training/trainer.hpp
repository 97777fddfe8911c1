#pragma once

#include "arc/nn/network.hpp"
#include "arc/training/batch.hpp"
#include "arc/training/optimizer.hpp"
#include "arc/training/schedule.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace arc::training {

struct TrainConfig {
    int max_epochs = 100;
    std::size_t batch_size = 32;  ///< half drawn, half their rotations
    std::uint64_t seed = 0;
    std::string precision = "float32";
    int checkpoint_every = 1;  ///< epochs between last.ckpt writes
    std::size_t eval_batch = 64;
    std::filesystem::path out_dir;
    bool resume = false;
    Schedule schedule;
    AmsGradConfig optimizer;
    nlohmann::json extra = nlohmann::json::object();  ///< stored in every checkpoint

    /// Throws ConfigError on out-of-range fields.
    void validate() const;
};

struct EpochMetrics {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0, train_acc = 0.0;
    double val_loss = 0.0, val_acc = 0.0;

    bool operator==(const EpochMetrics&) const = default;
};

inline constexpr std::string_view kMetricsHeader = "epoch,lr,train_loss,train_acc,val_loss,val_acc";

/// One CSV line without newline. lr is printed with round-trip precision.
std::string format_metrics(const EpochMetrics& m);
EpochMetrics parse_metrics(std::string_view line);
nlohmann::json to_json(const EpochMetrics& m);
EpochMetrics metrics_from_json(const nlohmann::json& j);

struct TrainResult {
    std::vector<EpochMetrics> history;
    int best_epoch = -1;
    std::filesystem::path best_checkpoint, last_checkpoint, metrics_log;
};

/// Runs the optimization loop, writing metrics.csv, best.ckpt, last.ckpt and
/// last.optim into config.out_dir. The best checkpoint is the epoch with the
/// highest validation accuracy (lower validation loss on ties).
///
/// With config.resume, continues from last.ckpt/last.optim when present; a
/// resumed run reproduces an uninterrupted one exactly.
///
/// A NumericalError aborts the run and is rethrown; checkpoints from earlier
/// epochs are left as they were.
TrainResult train(nn::Network<float>& net, std::span<const LabeledImage> train_split,
                  std::span<const LabeledImage> val_split, const TrainConfig& config,
                  const std::function<void(const EpochMetrics&)>& on_epoch = {});

}  // namespace arc::training
