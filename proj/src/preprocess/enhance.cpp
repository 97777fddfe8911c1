#include "arc/preprocess/enhance.hpp"

#include "arc/common/error.hpp"
#include "arc/preprocess/edges.hpp"

#include <algorithm>
#include <cmath>

namespace arc::preprocess {

namespace {

std::uint8_t clamp_round(double v) noexcept {
    const double r = std::round(v);
    if (r <= 0.0) return 0;
    if (r >= 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

void require_rgb(const vision::Raster& img, const char* what) {
    if (img.channels() != 3) {
        throw Error(ErrorCode::InvalidChannels, std::string(what) + " expects a 3-channel raster");
    }
}

}  // namespace

vision::Raster sobel_sharpen(const vision::Raster& img, double gain) {
    require_rgb(img, "sobel_sharpen");
    if (gain == 0.0 || img.empty()) return img;
    const Gradient g = sobel(vision::to_luma(img));
    vision::Raster out = img;
    auto px = out.data();
    for (std::size_t i = 0; i < g.gx.size(); ++i) {
        const double add = gain * g.magnitude(i);
        if (add == 0.0) continue;
        for (int ch = 0; ch < 3; ++ch) px[3 * i + ch] = clamp_round(px[3 * i + ch] + add);
    }
    return out;
}

Histogram Histogram::of(const vision::Raster& gray) {
    if (gray.channels() != 1) {
        throw Error(ErrorCode::InvalidChannels, "histogram expects a 1-channel raster");
    }
    Histogram h;
    for (auto v : gray.data()) ++h.counts[v];
    const double total = static_cast<double>(gray.size());
    if (total == 0.0) return h;
    for (int i = 0; i < 256; ++i) h.normalized[i] = static_cast<double>(h.counts[i]) * 255.0 / total;
    double acc = 0.0;
    for (int i = 0; i < 256; ++i) {
        h.integral[i] = acc;
        acc += h.normalized[i];
    }
    return h;
}

std::uint8_t Histogram::lookup(std::uint8_t v) const noexcept { return clamp_round(integral[v]); }

vision::Raster equalize_hist_luma(const vision::Raster& img) {
    require_rgb(img, "equalize_hist_luma");
    const vision::Raster luma = vision::to_luma(img);
    const Histogram hist = Histogram::of(luma);
    std::array<std::uint8_t, 256> lut{};
    for (int i = 0; i < 256; ++i) lut[i] = hist.lookup(static_cast<std::uint8_t>(i));

    vision::Raster out = img;
    auto px = out.data();
    const auto y = luma.data();
    for (std::size_t i = 0; i < y.size(); ++i) {
        const int shift = static_cast<int>(lut[y[i]]) - static_cast<int>(y[i]);
        for (int ch = 0; ch < 3; ++ch) {
            px[3 * i + ch] = static_cast<std::uint8_t>(std::clamp(px[3 * i + ch] + shift, 0, 255));
        }
    }
    return out;
}

}  // namespace arc::preprocess
