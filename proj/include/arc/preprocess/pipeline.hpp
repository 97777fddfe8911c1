#pragma once

#include "arc/preprocess/geometry.hpp"
#include "arc/preprocess/mask.hpp"
#include "arc/preprocess/morphology.hpp"
#include "arc/vision/raster.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace arc::preprocess {

struct PipelineConfig {
    /// Belt region of the raw frame; unset means the whole frame.
    std::optional<vision::AxisRect> belt_crop;
    double canny_low = 50.0;
    double canny_high = 150.0;
    StructuringRect close_kernel{7, 7};
    double sharpen_gain = 1.0;
    int target_side = 150;
    bool rotation_correction = true;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
    /// Stable text form; equal configs give equal strings.
    std::string canonical() const;
};

/// Intermediate products, kept when the caller asks for them.
struct PipelineTrace {
    vision::Raster cropped;
    vision::Raster rotated;
    BinaryMask edges;
    BinaryMask closed;
    std::vector<RotatedRect> candidates;
    RotatedRect selected;
    vision::Raster segmented;
    vision::Raster sharpened;
    vision::Raster equalized;
    vision::Raster resized;
    double angle_deg = 0.0;
    bool rotation_applied = false;
};

/// Frame to network input: belt crop, orientation correction, edge-based
/// segmentation, sharpening, luma equalization, square pad and resize.
/// Throws NoObject when segmentation finds nothing.
vision::Raster preprocess(const vision::Raster& frame, const PipelineConfig& cfg,
                          PipelineTrace* trace = nullptr);

/// File names of the six stage dumps, in pipeline order.
const std::vector<std::string>& stage_file_names();

/// The six stage rasters of a trace, aligned with stage_file_names().
std::vector<const vision::Raster*> stage_rasters(const PipelineTrace& trace);

/// Writes 01_crop.png ... 06_resize.png into `dir`.
void dump_stages(const PipelineTrace& trace, const std::filesystem::path& dir);

}  // namespace arc::preprocess
