#pragma once

#include "arc/preprocess/mask.hpp"

#include <vector>

namespace arc::preprocess {

struct PixelPoint {
    int row = 0;
    int col = 0;

    bool operator==(const PixelPoint&) const = default;
    auto operator<=>(const PixelPoint&) const = default;
};

/// Outer border of one 8-connected foreground component, in tracing order.
struct Contour {
    std::vector<PixelPoint> points;
};

/// Suzuki-Abe border following. Both outer and hole borders are traced so
/// the labelling stays correct, but only outer borders are returned, one per
/// 8-connected component, in raster order of their first pixel.
std::vector<Contour> find_contours(const BinaryMask& mask);

}  // namespace arc::preprocess
