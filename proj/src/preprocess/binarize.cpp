#include "arc/preprocess/binarize.hpp"

#include "arc/common/error.hpp"

#include <array>

namespace arc::preprocess {

int otsu_threshold(const vision::Raster& gray) {
    if (gray.channels() != 1) {
        throw Error(ErrorCode::InvalidChannels, "otsu_threshold expects a 1-channel raster");
    }
    if (gray.empty()) throw Error(ErrorCode::DegenerateImage, "empty image");

    std::array<std::uint64_t, 256> hist{};
    for (auto v : gray.data()) ++hist[v];
    const double total = static_cast<double>(gray.size());

    double sum_all = 0.0;
    for (int i = 0; i < 256; ++i) sum_all += static_cast<double>(i) * hist[i];

    double best = -1.0;
    int best_t = -1;
    double w0 = 0.0;
    double sum0 = 0.0;
    for (int t = 0; t < 255; ++t) {
        w0 += hist[t];
        sum0 += static_cast<double>(t) * hist[t];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double between = (w0 / total) * (w1 / total) * (mu0 - mu1) * (mu0 - mu1);
        if (between > best) {
            best = between;
            best_t = t;
        }
    }
    if (best_t < 0 || best <= 0.0) {
        throw Error(ErrorCode::DegenerateImage, "zero-variance image has no separating threshold");
    }
    return best_t;
}

BinaryMask foreground_mask(const vision::Raster& gray) {
    const int t = otsu_threshold(gray);
    BinaryMask mask(gray.height(), gray.width());
    auto& bits = mask.bits();
    const auto px = gray.data();
    for (std::size_t i = 0; i < px.size(); ++i) bits[i] = px[i] > t ? 1 : 0;
    return mask;
}

}  // namespace arc::preprocess
