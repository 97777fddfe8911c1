#pragma once

#include "arc/preprocess/mask.hpp"

namespace arc::preprocess {

/// Rectangular structuring element of odd size, anchored at its center.
struct StructuringRect {
    int height = 7;
    int width = 7;
};

/// Out-of-bounds pixels count as background.
BinaryMask dilate(const BinaryMask& mask, StructuringRect se = {});
/// Out-of-bounds pixels count as foreground.
BinaryMask erode(const BinaryMask& mask, StructuringRect se = {});
BinaryMask morph_close(const BinaryMask& mask, StructuringRect se = {});

}  // namespace arc::preprocess
