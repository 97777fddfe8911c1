#pragma once

// Small drawing helpers for building test fixtures.

#include "arc/common/random.hpp"
#include "arc/preprocess/mask.hpp"
#include "arc/vision/raster.hpp"

#include <cstdint>

namespace arc::testing {

inline vision::Raster random_raster(Rng& rng, int h, int w, int c) {
    vision::Raster img(h, w, c);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.uniform_int(256));
    return img;
}

inline preprocess::BinaryMask random_mask(Rng& rng, int h, int w, double density) {
    preprocess::BinaryMask m(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) m.set(r, c, rng.uniform() < density);
    return m;
}

inline void fill_rect(vision::Raster& img, int y0, int x0, int h, int w, std::uint8_t v) {
    for (int r = y0; r < y0 + h; ++r)
        for (int c = x0; c < x0 + w; ++c)
            for (int ch = 0; ch < img.channels(); ++ch) img.at(r, c, ch) = v;
}

inline void fill_disk(vision::Raster& img, int cy, int cx, int radius, std::uint8_t v) {
    for (int r = cy - radius; r <= cy + radius; ++r)
        for (int c = cx - radius; c <= cx + radius; ++c)
            if ((r - cy) * (r - cy) + (c - cx) * (c - cx) <= radius * radius)
                for (int ch = 0; ch < img.channels(); ++ch) img.at(r, c, ch) = v;
}

inline preprocess::BinaryMask mask_of(const vision::Raster& gray, std::uint8_t above = 0) {
    preprocess::BinaryMask m(gray.height(), gray.width());
    for (int r = 0; r < gray.height(); ++r)
        for (int c = 0; c < gray.width(); ++c) m.set(r, c, gray.at(r, c) > above);
    return m;
}

}  // namespace arc::testing
