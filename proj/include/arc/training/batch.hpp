#pragma once

#include "arc/common/random.hpp"
#include "arc/nn/tensor.hpp"
#include "arc/vision/raster.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace arc::training {

/// A preprocessed RGB image with its class index.
struct LabeledImage {
    vision::Raster image;
    std::size_t label = 0;
};

inline constexpr std::size_t kHalfBatch = 16;

/// Writes an interleaved RGB raster as planar floats in [0, 1].
void write_planar(const vision::Raster& img, float* dst);

/// (N, 3, H, W) tensor of the given images, all of one size.
nn::Tensor<float> images_to_tensor(std::span<const LabeledImage> items);
nn::Tensor<float> images_to_tensor(std::span<const vision::Raster* const> images);

nn::Tensor<float> one_hot(std::span<const std::size_t> labels, std::size_t classes);

struct Minibatch {
    nn::Tensor<float> images;  ///< (2h, 3, H, W)
    nn::Tensor<float> onehot;  ///< (2h, K)
    std::vector<std::size_t> labels;
    std::vector<std::size_t> source;  ///< pool index of each of the first h items
    std::vector<int> rotations;       ///< degrees applied to item h+i
};

/// The picked images followed by a copy of each rotated by 90, 180 or 270
/// degrees (drawn uniformly).
Minibatch make_minibatch(std::span<const LabeledImage> pool, std::span<const std::size_t> picks, std::size_t classes,
                         Rng& rng);

/// Draws `half` distinct pool items (with replacement if the pool is smaller,
/// which is logged) and builds a minibatch from them.
Minibatch assemble_minibatch(std::span<const LabeledImage> pool, std::size_t classes, Rng& rng,
                             std::size_t half = kHalfBatch);

/// Splits a shuffled [0, n) into groups of `half`. The final short group is
/// topped up with distinct indices from the rest. n must be >= half.
std::vector<std::vector<std::size_t>> epoch_groups(std::size_t n, std::size_t half, Rng& rng);

}  // namespace arc::training
