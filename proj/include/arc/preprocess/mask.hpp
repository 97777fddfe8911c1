#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace arc::preprocess {

/// One byte per pixel, 1 = foreground.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int height, int width, bool fill = false)
        : height_(height), width_(width),
          bits_(static_cast<std::size_t>(height) * width, fill ? 1 : 0) {}

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }

    bool get(int row, int col) const noexcept {
        return bits_[static_cast<std::size_t>(row) * width_ + col] != 0;
    }
    void set(int row, int col, bool v = true) noexcept {
        bits_[static_cast<std::size_t>(row) * width_ + col] = v ? 1 : 0;
    }
    bool inside(int row, int col) const noexcept {
        return row >= 0 && col >= 0 && row < height_ && col < width_;
    }

    std::size_t count() const noexcept {
        std::size_t n = 0;
        for (auto b : bits_) n += b;
        return n;
    }

    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
    std::vector<std::uint8_t>& bits() noexcept { return bits_; }

    bool operator==(const BinaryMask&) const = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> bits_;
};

}  // namespace arc::preprocess
