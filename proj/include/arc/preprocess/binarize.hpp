#pragma once

#include "arc/preprocess/mask.hpp"
#include "arc/vision/raster.hpp"

namespace arc::preprocess {

/// Otsu threshold over the 256-bin histogram. Classes are (<= t) and (> t);
/// the smallest maximizing t wins. Throws DegenerateImage for constant input.
int otsu_threshold(const vision::Raster& gray);

/// Pixels strictly above the Otsu threshold.
BinaryMask foreground_mask(const vision::Raster& gray);

}  // namespace arc::preprocess
