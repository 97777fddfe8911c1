#pragma once

#include "arc/preprocess/mask.hpp"
#include "arc/vision/raster.hpp"

#include <vector>

namespace arc::preprocess {

/// Unnormalized 3x3 Sobel responses with replicated borders.
struct Gradient {
    int height = 0;
    int width = 0;
    std::vector<int> gx;
    std::vector<int> gy;

    double magnitude(std::size_t i) const noexcept;
};

Gradient sobel(const vision::Raster& gray);

/// Thins the gradient magnitude to local maxima along the gradient direction
/// quantized to 0/45/90/135 degrees. A pixel survives when it is strictly
/// greater than its backward neighbour and not smaller than its forward one,
/// so plateaus of width two keep a single pixel. Suppressed pixels are 0.
std::vector<double> non_max_suppression(const Gradient& g);

/// Keeps pixels >= high, plus pixels >= low that are 8-connected to a kept
/// pixel through other pixels >= low.
BinaryMask hysteresis(const std::vector<double>& magnitude, int height, int width,
                      double low, double high);

/// Canny edge map on the L2 magnitude of the unnormalized Sobel gradient.
BinaryMask canny(const vision::Raster& gray, double low, double high);

}  // namespace arc::preprocess
