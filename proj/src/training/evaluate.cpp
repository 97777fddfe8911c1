#include "arc/training/evaluate.hpp"

#include "arc/common/error.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace arc::training {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : k_(classes), counts_(classes * classes, 0) {
    if (classes == 0) throw Error(ErrorCode::ConfigError, "confusion matrix needs at least one class");
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
    if (truth >= k_ || predicted >= k_) throw Error(ErrorCode::InvalidLabel, "class index out of range");
    ++counts_[truth * k_ + predicted];
}

std::uint64_t ConfusionMatrix::row_total(std::size_t truth) const {
    const auto row = counts_.begin() + static_cast<std::ptrdiff_t>(truth * k_);
    return std::accumulate(row, row + static_cast<std::ptrdiff_t>(k_), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

double ConfusionMatrix::accuracy() const {
    const std::uint64_t n = total();
    if (n == 0) return 0.0;
    std::uint64_t hit = 0;
    for (std::size_t i = 0; i < k_; ++i) hit += count(i, i);
    return static_cast<double>(hit) / static_cast<double>(n);
}

std::vector<double> ConfusionMatrix::row_percentages(std::size_t truth) const {
    std::vector<double> out(k_, 0.0);
    const std::uint64_t n = row_total(truth);
    if (n == 0) return out;
    for (std::size_t j = 0; j < k_; ++j) out[j] = 100.0 * static_cast<double>(count(truth, j)) / n;
    return out;
}

std::vector<std::size_t> ConfusionMatrix::confused_rows() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < k_; ++i) {
        if (row_total(i) != count(i, i)) out.push_back(i);
    }
    return out;
}

namespace {

std::string header(std::size_t k, const std::vector<std::string>& labels) {
    if (!labels.empty() && labels.size() != k) throw Error(ErrorCode::ConfigError, "one label per class is needed");
    std::string out = "true\\predicted";
    for (std::size_t j = 0; j < k; ++j) out += "," + (labels.empty() ? std::to_string(j) : labels[j]);
    return out + "\n";
}

std::string label_of(std::size_t i, const std::vector<std::string>& labels) {
    return labels.empty() ? std::to_string(i) : labels[i];
}

}  // namespace

std::string ConfusionMatrix::counts_csv(const std::vector<std::string>& labels) const {
    std::string out = header(k_, labels);
    for (std::size_t i = 0; i < k_; ++i) {
        out += label_of(i, labels);
        for (std::size_t j = 0; j < k_; ++j) out += "," + std::to_string(count(i, j));
        out += "\n";
    }
    return out;
}

std::string ConfusionMatrix::percentages_csv(const std::vector<std::string>& labels, bool confused_only) const {
    std::string out = header(k_, labels);
    std::vector<std::size_t> rows(k_);
    std::iota(rows.begin(), rows.end(), 0);
    if (confused_only) rows = confused_rows();
    char buf[32];
    for (const std::size_t i : rows) {
        out += label_of(i, labels);
        for (const double p : row_percentages(i)) {
            std::snprintf(buf, sizeof buf, ",%.4f", p);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

std::size_t argmax(std::span<const float> row) {
    return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

std::vector<std::pair<std::size_t, float>> top_k(std::span<const float> probs, std::size_t k) {
    std::vector<std::size_t> idx(probs.size());
    std::iota(idx.begin(), idx.end(), 0);
    k = std::min(k, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) { return probs[a] > probs[b] || (probs[a] == probs[b] && a < b); });
    std::vector<std::pair<std::size_t, float>> out;
    for (std::size_t i = 0; i < k; ++i) out.emplace_back(idx[i], probs[idx[i]]);
    return out;
}

Evaluation evaluate(const nn::Network<float>& net, std::span<const LabeledImage> split, std::size_t batch) {
    if (split.empty()) throw Error(ErrorCode::ConfigError, "cannot evaluate an empty split");
    if (batch == 0) batch = 1;
    const std::size_t k = net.spec().classes;
    Evaluation ev;
    ev.matrix = ConfusionMatrix(k);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < split.size(); start += batch) {
        const auto chunk = split.subspan(start, std::min(batch, split.size() - start));
        const auto probs = net.infer(images_to_tensor(chunk));
        std::vector<std::size_t> labels;
        for (const auto& it : chunk) labels.push_back(it.label);
        loss_sum += nn::cross_entropy(probs, one_hot(labels, k)) * static_cast<double>(chunk.size());
        for (std::size_t i = 0; i < chunk.size(); ++i) {
            const std::size_t pred = argmax(std::span<const float>(probs.data() + i * k, k));
            ev.predictions.push_back(pred);
            ev.matrix.add(labels[i], pred);
        }
    }
    ev.accuracy = ev.matrix.accuracy();
    ev.loss = loss_sum / static_cast<double>(split.size());
    return ev;
}

}  // namespace arc::training
