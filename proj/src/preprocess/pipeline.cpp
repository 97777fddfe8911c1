#include "arc/preprocess/pipeline.hpp"

#include "arc/common/error.hpp"
#include "arc/preprocess/binarize.hpp"
#include "arc/preprocess/contours.hpp"
#include "arc/preprocess/edges.hpp"
#include "arc/preprocess/enhance.hpp"
#include "arc/vision/image_io.hpp"

namespace arc::preprocess {

void PipelineConfig::validate() const {
    if (!(canny_low < canny_high)) throw Error(ErrorCode::ConfigError, "canny_low must be < canny_high");
    if (target_side < 1) throw Error(ErrorCode::ConfigError, "target_side must be >= 1");
    if (close_kernel.height < 1 || close_kernel.width < 1 || close_kernel.height % 2 == 0 ||
        close_kernel.width % 2 == 0) {
        throw Error(ErrorCode::ConfigError, "close_kernel extents must be odd and positive");
    }
    if (belt_crop && (belt_crop->width < 1 || belt_crop->height < 1 || belt_crop->x0 < 0 ||
                      belt_crop->y0 < 0)) {
        throw Error(ErrorCode::ConfigError, "belt_crop must be a non-empty rectangle");
    }
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json j;
    if (belt_crop) {
        j["belt_crop"] = {{"x0", belt_crop->x0}, {"y0", belt_crop->y0},
                          {"width", belt_crop->width}, {"height", belt_crop->height}};
    } else {
        j["belt_crop"] = nullptr;
    }
    j["canny_low"] = canny_low;
    j["canny_high"] = canny_high;
    j["close_kernel"] = {close_kernel.height, close_kernel.width};
    j["sharpen_gain"] = sharpen_gain;
    j["target_side"] = target_side;
    j["rotation_correction"] = rotation_correction;
    return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    try {
        if (j.contains("belt_crop") && !j["belt_crop"].is_null()) {
            const auto& b = j["belt_crop"];
            cfg.belt_crop = vision::AxisRect{b.at("x0").get<int>(), b.at("y0").get<int>(),
                                             b.at("width").get<int>(), b.at("height").get<int>()};
        }
        cfg.canny_low = j.value("canny_low", cfg.canny_low);
        cfg.canny_high = j.value("canny_high", cfg.canny_high);
        if (j.contains("close_kernel")) {
            cfg.close_kernel = {j["close_kernel"].at(0).get<int>(), j["close_kernel"].at(1).get<int>()};
        }
        cfg.sharpen_gain = j.value("sharpen_gain", cfg.sharpen_gain);
        cfg.target_side = j.value("target_side", cfg.target_side);
        cfg.rotation_correction = j.value("rotation_correction", cfg.rotation_correction);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("pipeline config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string PipelineConfig::canonical() const { return to_json().dump(); }

vision::Raster preprocess(const vision::Raster& frame, const PipelineConfig& cfg, PipelineTrace* trace) {
    cfg.validate();
    if (frame.channels() != 3) {
        throw Error(ErrorCode::InvalidChannels, "preprocess expects a 3-channel frame");
    }

    // 1. belt crop
    vision::Raster cropped =
        cfg.belt_crop ? vision::crop(frame, *cfg.belt_crop) : frame;

    // 2. orientation correction; a degenerate crop leaves the image as is
    vision::Raster rotated = cropped;
    double angle = 0.0;
    bool rotation_applied = false;
    if (cfg.rotation_correction) {
        try {
            const BinaryMask fg = foreground_mask(vision::to_luma(cropped));
            angle = orientation_angle(fg);
            if (angle != 0.0) {
                rotated = vision::rotate(cropped, -angle, 0);
                rotation_applied = true;
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateImage && e.code() != ErrorCode::NoForeground) throw;
            angle = 0.0;
        }
    }

    // 3. segmentation: edges, closing, border following, longest diagonal
    const vision::Raster gray = vision::to_luma(rotated);
    BinaryMask edges = canny(gray, cfg.canny_low, cfg.canny_high);
    BinaryMask closed = morph_close(edges, cfg.close_kernel);
    const auto contours = find_contours(closed);
    if (contours.empty()) throw Error(ErrorCode::NoObject, "no object found on the belt");
    std::vector<RotatedRect> rects;
    rects.reserve(contours.size());
    for (const auto& c : contours) rects.push_back(min_area_rect(c));
    const RotatedRect selected = select_main_object(rects);
    vision::Raster segmented =
        vision::crop(rotated, selected.bounding_box(rotated.height(), rotated.width()));

    // 4-6. enhancement and normalization
    vision::Raster sharpened = sobel_sharpen(segmented, cfg.sharpen_gain);
    vision::Raster equalized = equalize_hist_luma(sharpened);
    vision::Raster resized = vision::pad_square_resize(equalized, cfg.target_side);

    if (trace) {
        trace->cropped = std::move(cropped);
        trace->rotated = std::move(rotated);
        trace->edges = std::move(edges);
        trace->closed = std::move(closed);
        trace->candidates = std::move(rects);
        trace->selected = selected;
        trace->segmented = std::move(segmented);
        trace->sharpened = std::move(sharpened);
        trace->equalized = std::move(equalized);
        trace->resized = resized;
        trace->angle_deg = angle;
        trace->rotation_applied = rotation_applied;
    }
    return resized;
}

const std::vector<std::string>& stage_file_names() {
    static const std::vector<std::string> names = {"01_crop.png",    "02_rotate.png",
                                                   "03_segment.png", "04_sharpen.png",
                                                   "05_equalize.png", "06_resize.png"};
    return names;
}

std::vector<const vision::Raster*> stage_rasters(const PipelineTrace& trace) {
    return {&trace.cropped,   &trace.rotated,   &trace.segmented,
            &trace.sharpened, &trace.equalized, &trace.resized};
}

void dump_stages(const PipelineTrace& trace, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto& names = stage_file_names();
    const auto rasters = stage_rasters(trace);
    for (std::size_t i = 0; i < names.size(); ++i) vision::write_png(*rasters[i], dir / names[i]);
}

}  // namespace arc::preprocess
