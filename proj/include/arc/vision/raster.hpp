#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace arc::vision {

/// H x W x C grid of 8-bit intensities, row-major, RGB order for 3 channels.
class Raster {
public:
    Raster() = default;
    Raster(int height, int width, int channels, std::uint8_t fill = 0);
    Raster(int height, int width, int channels, std::vector<std::uint8_t> data);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    int channels() const noexcept { return channels_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t size() const noexcept { return data_.size(); }

    std::uint8_t& at(int row, int col, int ch = 0) noexcept {
        return data_[index(row, col, ch)];
    }
    std::uint8_t at(int row, int col, int ch = 0) const noexcept {
        return data_[index(row, col, ch)];
    }

    std::span<std::uint8_t> data() noexcept { return data_; }
    std::span<const std::uint8_t> data() const noexcept { return data_; }
    std::uint8_t* row_ptr(int row) noexcept {
        return data_.data() + static_cast<std::size_t>(row) * width_ * channels_;
    }
    const std::uint8_t* row_ptr(int row) const noexcept {
        return data_.data() + static_cast<std::size_t>(row) * width_ * channels_;
    }

    bool operator==(const Raster&) const = default;

private:
    std::size_t index(int row, int col, int ch) const noexcept {
        return (static_cast<std::size_t>(row) * width_ + col) * channels_ + ch;
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Axis-aligned region; (x0, y0) is the inclusive top-left pixel.
struct AxisRect {
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;

    bool operator==(const AxisRect&) const = default;
};

/// Rec. 601 luma, rounded to nearest.
Raster to_luma(const Raster& img);
std::uint8_t luma_of(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

/// Rotates counter-clockwise by `angle_deg` about the image center. Output
/// covers the rotated bounding box. Multiples of 90 degrees are exact
/// index permutations; other angles are bilinearly sampled.
Raster rotate(const Raster& img, double angle_deg, std::uint8_t fill = 0);

Raster crop(const Raster& img, const AxisRect& r);

/// Centers the image on a zero square canvas and bilinearly resizes it to
/// side x side.
Raster pad_square_resize(const Raster& img, int side = 150);

/// Bilinear resize with pixel-center alignment.
Raster resize_bilinear(const Raster& img, int out_height, int out_width);

}  // namespace arc::vision
