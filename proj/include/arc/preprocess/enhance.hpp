#pragma once

#include "arc/vision/raster.hpp"

#include <array>
#include <cstdint>

namespace arc::preprocess {

/// Adds gain * |Sobel(luma)| to every channel, rounded and clamped.
vision::Raster sobel_sharpen(const vision::Raster& img, double gain = 1.0);

/// Luma histogram normalized so the bins sum to 255, with its exclusive
/// prefix integral used as the equalization lookup table.
struct Histogram {
    std::array<std::uint64_t, 256> counts{};
    std::array<double, 256> normalized{};
    std::array<double, 256> integral{};  ///< integral[i] = sum of normalized[j], j < i

    static Histogram of(const vision::Raster& gray);
    std::uint8_t lookup(std::uint8_t v) const noexcept;
};

/// Equalizes the luma and keeps each pixel's chroma offsets (channel minus
/// luma) unchanged.
vision::Raster equalize_hist_luma(const vision::Raster& img);

}  // namespace arc::preprocess
