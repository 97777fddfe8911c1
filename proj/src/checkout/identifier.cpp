#include "arc/checkout/identifier.hpp"

#include "arc/common/error.hpp"
#include "arc/training/batch.hpp"
#include "arc/training/evaluate.hpp"

namespace arc::checkout {

NetworkIdentifier::NetworkIdentifier(nn::Network<float> net, preprocess::PipelineConfig cfg)
    : net_(std::move(net)), cfg_(std::move(cfg)) {
    net_.set_mode(nn::Mode::Infer);
    cfg_.validate();
}

std::vector<float> NetworkIdentifier::probabilities(const vision::Raster& frame) const {
    const vision::Raster* img[] = {nullptr};
    const auto pre = preprocess::preprocess(frame, cfg_);
    img[0] = &pre;
    const auto probs = net_.infer(training::images_to_tensor(img));
    return {probs.values().begin(), probs.values().end()};
}

IdentifyResult decide(const std::vector<float>& probs, double threshold) {
    if (probs.empty()) throw Error(ErrorCode::ShapeError, "identifier returned no probabilities");
    IdentifyResult r;
    for (const auto& [id, p] : training::top_k(probs, 5)) r.top5.push_back({id, p});
    r.top1 = r.top5.front().item_id;
    r.confidence = r.top5.front().probability;
    r.accepted = r.confidence >= threshold;
    return r;
}

}  // namespace arc::checkout
