#pragma once

#include "arc/common/random.hpp"
#include "arc/dataset/catalog.hpp"
#include "arc/vision/raster.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace arc::dataset {

/// Colored geometric shapes on a dark belt, a stand-in corpus for
/// end-to-end training runs.
struct ShapeClass {
    std::string name;
    std::array<std::uint8_t, 3> color;
};

/// The ten shape classes, in item-id order.
const std::vector<ShapeClass>& shape_classes();

struct SyntheticFrameConfig {
    int height = 240;
    int width = 320;
    std::uint8_t belt_level = 12;
    double noise = 6.0;  ///< peak-to-peak uniform pixel noise
};

/// One raw frame of class `cls` with random position, size, rotation,
/// color jitter and belt noise.
vision::Raster render_shape_frame(std::size_t cls, Rng& rng, const SyntheticFrameConfig& cfg = {});

/// Catalog of the first `classes` shape classes with made-up prices.
Catalog shape_catalog(std::size_t classes = 10);

/// Writes root/catalog.json and root/<dir>/<nnnn>.png, `per_class` frames
/// for each class. Frames depend only on (seed, class, index).
void write_shape_corpus(const std::filesystem::path& root, std::size_t per_class, std::uint64_t seed,
                        std::size_t classes = 10, const SyntheticFrameConfig& cfg = {});

}  // namespace arc::dataset
