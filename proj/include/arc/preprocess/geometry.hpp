#pragma once

#include "arc/preprocess/contours.hpp"
#include "arc/preprocess/mask.hpp"
#include "arc/vision/raster.hpp"

#include <span>
#include <vector>

namespace arc::preprocess {

/// x is the column, y is the row (screen coordinates, y down).
struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Andrew's monotone chain; collinear points dropped, counter-clockwise in
/// (x, y). Fewer than three distinct non-collinear points yield the extreme
/// points only.
std::vector<Point2> convex_hull(std::vector<Point2> points);

/// Filled convex hull of the foreground, using exact integer row spans.
BinaryMask hull_region(const BinaryMask& mask);

/// Principal-axis angle in degrees within (-90, 90], counter-clockwise
/// positive, from the central second moments of the hull region. Returns 0
/// for isotropic shapes.
double orientation_angle(const BinaryMask& mask);

struct RotatedRect {
    double center_row = 0.0;
    double center_col = 0.0;
    double len_a = 0.0;      ///< side length along `angle_deg`
    double len_b = 0.0;      ///< side length perpendicular to it
    double angle_deg = 0.0;  ///< in [0, 90), counter-clockwise on screen

    double diagonal() const noexcept;
    double area() const noexcept { return len_a * len_b; }
    /// Corner points (x = col, y = row).
    std::vector<Point2> corners() const;
    /// Smallest pixel rectangle covering the corners, clipped to the raster.
    vision::AxisRect bounding_box(int height, int width) const;
};

/// Minimum-area enclosing rectangle via rotating calipers over the hull.
RotatedRect min_area_rect(std::span<const Point2> points);
RotatedRect min_area_rect(const Contour& contour);

/// Longest diagonal wins; ties keep the earliest. Throws NoObject when empty.
const RotatedRect& select_main_object(std::span<const RotatedRect> rects);

}  // namespace arc::preprocess
