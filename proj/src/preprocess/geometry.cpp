#include "arc/preprocess/geometry.hpp"

#include "arc/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace arc::preprocess {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) noexcept {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

double to_degrees(double rad) { return rad * 180.0 / M_PI; }

}  // namespace

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Point2& a, const Point2& b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    if (pts.size() < 3) return pts;

    std::vector<Point2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        const auto& p = pts[i];
        while (k >= lower && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    hull.resize(k - 1);
    return hull;
}

BinaryMask hull_region(const BinaryMask& mask) {
    std::vector<Point2> pts;
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            if (!mask.get(r, c)) continue;
            // Interior pixels of a row never reach the hull; keep row ends only.
            const bool left_end = c == 0 || !mask.get(r, c - 1);
            const bool right_end = c + 1 == mask.width() || !mask.get(r, c + 1);
            if (left_end || right_end) pts.push_back({static_cast<double>(c), static_cast<double>(r)});
        }
    }
    BinaryMask region(mask.height(), mask.width());
    if (pts.empty()) return region;
    const auto hull = convex_hull(std::move(pts));
    if (hull.size() < 3) {
        // Collinear: the region is the segment between the extreme points.
        if (hull.size() == 1) {
            region.set(static_cast<int>(hull[0].y), static_cast<int>(hull[0].x));
            return region;
        }
        for (int r = 0; r < mask.height(); ++r)
            for (int c = 0; c < mask.width(); ++c)
                if (mask.get(r, c)) region.set(r, c);
        const Point2 a = hull[0], b = hull[1];
        const int steps = static_cast<int>(std::max(std::abs(b.x - a.x), std::abs(b.y - a.y)));
        const auto dx = static_cast<std::int64_t>(b.x - a.x);
        const auto dy = static_cast<std::int64_t>(b.y - a.y);
        for (int s = 0; s <= steps; ++s) {
            // Only exact lattice points on the segment belong to it.
            if ((dx * s) % steps != 0 || (dy * s) % steps != 0) continue;
            region.set(static_cast<int>(a.y + dy * s / steps), static_cast<int>(a.x + dx * s / steps));
        }
        return region;
    }

    int ymin = mask.height(), ymax = -1;
    for (const auto& p : hull) {
        ymin = std::min(ymin, static_cast<int>(p.y));
        ymax = std::max(ymax, static_cast<int>(p.y));
    }
    const std::size_t n = hull.size();
    for (int y = ymin; y <= ymax; ++y) {
        std::int64_t lo = std::numeric_limits<std::int64_t>::max();
        std::int64_t hi = std::numeric_limits<std::int64_t>::min();
        for (std::size_t i = 0; i < n; ++i) {
            const auto x1 = static_cast<std::int64_t>(hull[i].x);
            const auto y1 = static_cast<std::int64_t>(hull[i].y);
            const auto x2 = static_cast<std::int64_t>(hull[(i + 1) % n].x);
            const auto y2 = static_cast<std::int64_t>(hull[(i + 1) % n].y);
            if (y < std::min(y1, y2) || y > std::max(y1, y2)) continue;
            if (y1 == y2) {
                lo = std::min({lo, x1, x2});
                hi = std::max({hi, x1, x2});
                continue;
            }
            std::int64_t num = x1 * (y2 - y1) + (y - y1) * (x2 - x1);
            std::int64_t den = y2 - y1;
            if (den < 0) {
                num = -num;
                den = -den;
            }
            lo = std::min(lo, ceil_div(num, den));
            hi = std::max(hi, floor_div(num, den));
        }
        for (std::int64_t x = std::max<std::int64_t>(lo, 0);
             x <= std::min<std::int64_t>(hi, mask.width() - 1); ++x) {
            region.set(y, static_cast<int>(x));
        }
    }
    return region;
}

double orientation_angle(const BinaryMask& mask) {
    if (mask.count() == 0) throw Error(ErrorCode::NoForeground, "mask has no foreground pixels");
    const BinaryMask region = hull_region(mask);

    double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int r = 0; r < region.height(); ++r) {
        for (int c = 0; c < region.width(); ++c) {
            if (!region.get(r, c)) continue;
            // y axis pointing up so that counter-clockwise angles are positive.
            const double x = c;
            const double y = -r;
            n += 1;
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
    }
    const double mu20 = sxx - sx * sx / n;
    const double mu02 = syy - sy * sy / n;
    const double mu11 = sxy - sx * sy / n;
    const double tol = 1e-9 * n * n;
    if (std::abs(mu20 - mu02) < tol && std::abs(mu11) < tol) return 0.0;
    const double theta = 0.5 * to_degrees(std::atan2(2.0 * mu11, mu20 - mu02));
    return theta == 0.0 ? 0.0 : theta;
}

double RotatedRect::diagonal() const noexcept { return std::hypot(len_a, len_b); }

std::vector<Point2> RotatedRect::corners() const {
    const double t = angle_deg * M_PI / 180.0;
    // Unit vectors on screen: angle is counter-clockwise, rows grow down.
    const Point2 u{std::cos(t), -std::sin(t)};
    const Point2 v{std::sin(t), std::cos(t)};
    const double ha = len_a / 2.0;
    const double hb = len_b / 2.0;
    std::vector<Point2> out;
    for (const auto& [sa, sb] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}) {
        out.push_back({center_col + sa * ha * u.x + sb * hb * v.x,
                       center_row + sa * ha * u.y + sb * hb * v.y});
    }
    return out;
}

vision::AxisRect RotatedRect::bounding_box(int height, int width) const {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& p : corners()) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    constexpr double kSnap = 1e-6;
    const int x0 = std::clamp(static_cast<int>(std::floor(xmin + kSnap)), 0, width - 1);
    const int x1 = std::clamp(static_cast<int>(std::ceil(xmax - kSnap)), 0, width - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(ymin + kSnap)), 0, height - 1);
    const int y1 = std::clamp(static_cast<int>(std::ceil(ymax - kSnap)), 0, height - 1);
    return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

RotatedRect min_area_rect(std::span<const Point2> points) {
    if (points.empty()) throw Error(ErrorCode::ShapeError, "min_area_rect needs at least one point");
    const auto hull = convex_hull(std::vector<Point2>(points.begin(), points.end()));
    RotatedRect rect;
    if (hull.size() == 1) {
        rect.center_col = hull[0].x;
        rect.center_row = hull[0].y;
        return rect;
    }
    if (hull.size() == 2) {
        const double dx = hull[1].x - hull[0].x;
        const double dy = hull[1].y - hull[0].y;
        rect.center_col = (hull[0].x + hull[1].x) / 2.0;
        rect.center_row = (hull[0].y + hull[1].y) / 2.0;
        rect.len_a = std::hypot(dx, dy);
        double a = to_degrees(std::atan2(-dy, dx));
        while (a < 0.0) {
            a += 90.0;
            std::swap(rect.len_a, rect.len_b);
        }
        while (a >= 90.0) {
            a -= 90.0;
            std::swap(rect.len_a, rect.len_b);
        }
        rect.angle_deg = a;
        return rect;
    }

    const std::size_t n = hull.size();
    auto at = [&](std::size_t i) -> const Point2& { return hull[i % n]; };
    auto dot = [](const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; };
    auto sub = [](const Point2& a, const Point2& b) { return Point2{a.x - b.x, a.y - b.y}; };

    double best_area = std::numeric_limits<double>::infinity();
    Point2 best_u{}, best_v{}, best_origin{};
    double best_a0 = 0, best_a1 = 0, best_b1 = 0;

    // Calipers: j tracks the farthest point from the current edge, k the
    // maximum along the edge direction, m the minimum. All three advance
    // monotonically around the hull.
    std::size_t j = 1, k = 1, m = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 p = at(i);
        const Point2 e = sub(at(i + 1), p);
        const double len = std::hypot(e.x, e.y);
        const Point2 u{e.x / len, e.y / len};
        const Point2 v{-u.y, u.x};  // inward normal for a counter-clockwise hull

        if (k < i + 1) k = i + 1;
        for (std::size_t guard = 0; guard < n && dot(sub(at(k + 1), p), u) > dot(sub(at(k), p), u); ++guard) ++k;
        if (j < k) j = k;
        for (std::size_t guard = 0; guard < n && dot(sub(at(j + 1), p), v) > dot(sub(at(j), p), v); ++guard) ++j;
        if (i == 0) m = j;
        if (m < j) m = j;
        for (std::size_t guard = 0; guard < n && dot(sub(at(m + 1), p), u) < dot(sub(at(m), p), u); ++guard) ++m;

        const double a1 = dot(sub(at(k), p), u);
        const double a0 = dot(sub(at(m), p), u);
        const double b1 = dot(sub(at(j), p), v);
        const double area = (a1 - a0) * b1;
        if (area < best_area) {
            best_area = area;
            best_u = u;
            best_v = v;
            best_origin = p;
            best_a0 = a0;
            best_a1 = a1;
            best_b1 = b1;
        }
    }

    const double ca = (best_a0 + best_a1) / 2.0;
    const double cb = best_b1 / 2.0;
    rect.center_col = best_origin.x + best_u.x * ca + best_v.x * cb;
    rect.center_row = best_origin.y + best_u.y * ca + best_v.y * cb;
    rect.len_a = best_a1 - best_a0;
    rect.len_b = best_b1;
    double a = to_degrees(std::atan2(-best_u.y, best_u.x));
    while (a < 0.0) {
        a += 90.0;
        std::swap(rect.len_a, rect.len_b);
    }
    while (a >= 90.0) {
        a -= 90.0;
        std::swap(rect.len_a, rect.len_b);
    }
    if (a > 90.0 - 1e-9) {
        a = 0.0;
        std::swap(rect.len_a, rect.len_b);
    }
    rect.angle_deg = a;
    return rect;
}

RotatedRect min_area_rect(const Contour& contour) {
    std::vector<Point2> pts;
    pts.reserve(contour.points.size());
    for (const auto& p : contour.points) pts.push_back({static_cast<double>(p.col), static_cast<double>(p.row)});
    return min_area_rect(pts);
}

const RotatedRect& select_main_object(std::span<const RotatedRect> rects) {
    if (rects.empty()) throw Error(ErrorCode::NoObject, "no candidate object rectangles");
    std::size_t best = 0;
    for (std::size_t i = 1; i < rects.size(); ++i) {
        if (rects[i].diagonal() > rects[best].diagonal()) best = i;
    }
    return rects[best];
}

}  // namespace arc::preprocess
