#pragma once

#include "arc/common/file.hpp"
#include "arc/vision/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace arc::vision {

enum class ImageFormat { Png, Jpeg, Unknown };

ImageFormat sniff_format(std::span<const std::uint8_t> bytes) noexcept;

/// Decodes PNG or JPEG bytes into an RGB raster. Grayscale and alpha inputs
/// are converted to RGB. Throws Error(BadImage) on anything undecodable.
Raster decode_image(std::span<const std::uint8_t> bytes);
Raster read_image(const std::filesystem::path& path);

/// 1- or 3-channel PNG.
std::vector<std::uint8_t> encode_png(const Raster& img);
std::vector<std::uint8_t> encode_jpeg(const Raster& img, int quality = 95);
void write_png(const Raster& img, const std::filesystem::path& path);

using arc::read_file_bytes;
using arc::write_file_bytes;

}  // namespace arc::vision
