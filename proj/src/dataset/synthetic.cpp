#include "arc/dataset/synthetic.hpp"

#include "arc/common/error.hpp"
#include "arc/vision/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace arc::dataset {

namespace {

struct P {
    double x, y;
};

// Even-odd rule.
bool in_polygon(const std::vector<P>& poly, double x, double y) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        if ((poly[i].y > y) != (poly[j].y > y) &&
            x < (poly[j].x - poly[i].x) * (y - poly[i].y) / (poly[j].y - poly[i].y) + poly[i].x) {
            inside = !inside;
        }
    }
    return inside;
}

std::vector<P> regular(int n, double r_outer, double r_inner = 0.0) {
    std::vector<P> out;
    const int verts = r_inner > 0 ? 2 * n : n;
    for (int k = 0; k < verts; ++k) {
        const double a = -std::numbers::pi / 2 + 2 * std::numbers::pi * k / verts;
        const double r = (r_inner > 0 && k % 2) ? r_inner : r_outer;
        out.push_back({r * std::cos(a), r * std::sin(a)});
    }
    return out;
}

// Shape membership in unit local coordinates.
bool inside_shape(std::size_t cls, double u, double v) {
    static const auto triangle = regular(3, 1.0);
    static const auto star = regular(5, 1.0, 0.42);
    static const auto hexagon = regular(6, 1.0);
    static const auto pentagon = regular(5, 1.0);
    const double r2 = u * u + v * v;
    switch (cls) {
        case 0: return r2 <= 1.0;
        case 1: return std::abs(u) <= 0.75 && std::abs(v) <= 0.75;
        case 2: return in_polygon(triangle, u, v);
        case 3: return in_polygon(star, u, v);
        case 4: return in_polygon(hexagon, u, v);
        case 5: return (std::abs(u) <= 0.3 && std::abs(v) <= 0.95) || (std::abs(v) <= 0.3 && std::abs(u) <= 0.95);
        case 6: return std::abs(u) / 0.6 + std::abs(v) <= 1.0;
        case 7: return u * u + (v / 0.55) * (v / 0.55) <= 1.0;
        case 8: return in_polygon(pentagon, u, v);
        case 9: return r2 <= 1.0 && r2 >= 0.5 * 0.5;
        default: break;
    }
    return false;
}

std::uint8_t clamp_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

const std::vector<ShapeClass>& shape_classes() {
    static const std::vector<ShapeClass> classes = {
        {"red circle", {220, 40, 40}},     {"green square", {40, 180, 60}},   {"blue triangle", {60, 90, 230}},
        {"yellow star", {230, 210, 40}},   {"magenta hexagon", {200, 50, 200}}, {"cyan cross", {40, 200, 210}},
        {"orange diamond", {240, 140, 30}}, {"violet ellipse", {140, 80, 210}}, {"tan pentagon", {200, 160, 110}},
        {"pink ring", {240, 120, 160}},
    };
    return classes;
}

vision::Raster render_shape_frame(std::size_t cls, Rng& rng, const SyntheticFrameConfig& cfg) {
    if (cls >= shape_classes().size()) throw Error(ErrorCode::InvalidLabel, "no shape class " + std::to_string(cls));
    const int h = cfg.height, w = cfg.width;
    const double radius = std::min(h, w) * (0.18 + 0.12 * rng.uniform());
    const double margin = radius + 4;
    const double cx = margin + rng.uniform() * (w - 2 * margin);
    const double cy = margin + rng.uniform() * (h - 2 * margin);
    const double theta = rng.uniform() * 2 * std::numbers::pi;
    const double c = std::cos(theta), s = std::sin(theta);
    std::array<double, 3> color;
    for (int k = 0; k < 3; ++k) color[k] = shape_classes()[cls].color[k] + (rng.uniform() - 0.5) * 30.0;
    const double light = 0.9 + 0.2 * rng.uniform();

    vision::Raster img(h, w, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // Rotate into shape-local coordinates.
            const double dx = (x - cx) / radius, dy = (y - cy) / radius;
            const double u = c * dx + s * dy, v = -s * dx + c * dy;
            const bool on = inside_shape(cls, u, v);
            for (int k = 0; k < 3; ++k) {
                const double noise = (rng.uniform() - 0.5) * cfg.noise;
                img.at(y, x, k) = clamp_u8((on ? color[k] * light : cfg.belt_level) + noise);
            }
        }
    }
    return img;
}

Catalog shape_catalog(std::size_t classes) {
    if (classes < 1 || classes > shape_classes().size()) throw Error(ErrorCode::ConfigError, "1..10 shape classes");
    std::vector<CatalogEntry> items;
    for (std::size_t i = 0; i < classes; ++i) {
        std::string dir = shape_classes()[i].name;
        std::replace(dir.begin(), dir.end(), ' ', '_');
        items.push_back({i, dir, shape_classes()[i].name, static_cast<std::int64_t>(99 + 125 * i)});
    }
    return Catalog("USD", std::move(items));
}

void write_shape_corpus(const std::filesystem::path& root, std::size_t per_class, std::uint64_t seed,
                        std::size_t classes, const SyntheticFrameConfig& cfg) {
    const Catalog catalog = shape_catalog(classes);
    std::filesystem::create_directories(root);
    catalog.save(root / "catalog.json");
    for (const auto& item : catalog.entries()) {
        const auto dir = root / item.dir;
        std::filesystem::create_directories(dir);
        for (std::size_t i = 0; i < per_class; ++i) {
            Rng rng(derive_seed(derive_seed(seed, item.id), i));
            char name[32];
            std::snprintf(name, sizeof name, "%04zu.png", i);
            vision::write_png(render_shape_frame(item.id, rng, cfg), dir / name);
        }
    }
}

}  // namespace arc::dataset
