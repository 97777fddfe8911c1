#pragma once

#include "arc/nn/network.hpp"
#include "arc/training/batch.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace arc::training {

/// K x K counts, row = true class, column = predicted class.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t classes);

    void add(std::size_t truth, std::size_t predicted);

    std::size_t classes() const { return k_; }
    std::uint64_t count(std::size_t truth, std::size_t predicted) const { return counts_[truth * k_ + predicted]; }
    std::uint64_t row_total(std::size_t truth) const;
    std::uint64_t total() const;
    double accuracy() const;

    /// Row-normalized percentages; an empty row is all zeros.
    std::vector<double> row_percentages(std::size_t truth) const;
    /// Rows with any off-diagonal mass.
    std::vector<std::size_t> confused_rows() const;

    /// Header `true\predicted,<labels...>`, then one row per class. Labels
    /// default to class indices.
    std::string counts_csv(const std::vector<std::string>& labels = {}) const;
    /// Same layout with 4-decimal percentages, optionally only confused rows.
    std::string percentages_csv(const std::vector<std::string>& labels = {}, bool confused_only = false) const;

    bool operator==(const ConfusionMatrix&) const = default;

private:
    std::size_t k_;
    std::vector<std::uint64_t> counts_;
};

struct Evaluation {
    double accuracy = 0.0;
    double loss = 0.0;  ///< mean cross-entropy
    ConfusionMatrix matrix{1};
    std::vector<std::size_t> predictions;
};

/// Top-1 accuracy, mean loss and confusion matrix of an inference-mode pass.
Evaluation evaluate(const nn::Network<float>& net, std::span<const LabeledImage> split, std::size_t batch = 64);

/// Index of the largest entry; the first one on ties.
std::size_t argmax(std::span<const float> row);

/// The k most probable classes, most probable first (lower index on ties).
std::vector<std::pair<std::size_t, float>> top_k(std::span<const float> probs, std::size_t k);

}  // namespace arc::training
