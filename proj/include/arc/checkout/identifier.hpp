#pragma once

#include "arc/nn/network.hpp"
#include "arc/preprocess/pipeline.hpp"
#include "arc/vision/raster.hpp"

#include <cstddef>
#include <vector>

namespace arc::checkout {

struct Candidate {
    std::size_t item_id = 0;
    double probability = 0.0;
};

struct IdentifyResult {
    std::size_t top1 = 0;
    double confidence = 0.0;       ///< probability of top1
    std::vector<Candidate> top5;   ///< descending
    bool accepted = false;         ///< confidence >= threshold
};

inline constexpr double kDefaultThreshold = 0.5;

/// Frame -> class probabilities. Implementations must be callable from
/// several threads at once.
class Identifier {
public:
    virtual ~Identifier() = default;
    virtual std::size_t classes() const = 0;
    /// Throws NoObject when the frame holds nothing to identify.
    virtual std::vector<float> probabilities(const vision::Raster& frame) const = 0;
};

/// Preprocessing pipeline followed by an inference-mode network.
class NetworkIdentifier final : public Identifier {
public:
    NetworkIdentifier(nn::Network<float> net, preprocess::PipelineConfig cfg);

    std::size_t classes() const override { return net_.spec().classes; }
    std::vector<float> probabilities(const vision::Raster& frame) const override;

private:
    nn::Network<float> net_;
    preprocess::PipelineConfig cfg_;
};

/// Top-5 and the acceptance decision for one probability vector.
IdentifyResult decide(const std::vector<float>& probs, double threshold);

}  // namespace arc::checkout
