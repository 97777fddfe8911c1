#include "arc/vision/raster.hpp"

#include "arc/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace arc::vision {

namespace {

void check_shape(int height, int width, int channels) {
    if (height < 0 || width < 0) {
        throw Error(ErrorCode::ShapeError, "raster extents must be non-negative");
    }
    if (channels != 1 && channels != 3) {
        throw Error(ErrorCode::InvalidChannels,
                    "raster must have 1 or 3 channels, got " + std::to_string(channels));
    }
}

std::uint8_t clamp_round(double v) noexcept {
    const double r = std::round(v);
    if (r <= 0.0) return 0;
    if (r >= 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

// Exact index permutation for quarter turns (counter-clockwise).
Raster rotate_quarter(const Raster& img, int quarters) {
    const int h = img.height();
    const int w = img.width();
    const int c = img.channels();
    if (quarters == 0) return img;
    if (quarters == 2) {
        Raster out(h, w, c);
        for (int r = 0; r < h; ++r)
            for (int col = 0; col < w; ++col)
                for (int ch = 0; ch < c; ++ch)
                    out.at(r, col, ch) = img.at(h - 1 - r, w - 1 - col, ch);
        return out;
    }
    Raster out(w, h, c);
    for (int r = 0; r < w; ++r) {
        for (int col = 0; col < h; ++col) {
            for (int ch = 0; ch < c; ++ch) {
                out.at(r, col, ch) = quarters == 1 ? img.at(col, w - 1 - r, ch)
                                                   : img.at(h - 1 - col, r, ch);
            }
        }
    }
    return out;
}

}  // namespace

Raster::Raster(int height, int width, int channels, std::uint8_t fill) {
    check_shape(height, width, channels);
    height_ = height;
    width_ = width;
    channels_ = channels;
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

Raster::Raster(int height, int width, int channels, std::vector<std::uint8_t> data) {
    check_shape(height, width, channels);
    if (data.size() != static_cast<std::size_t>(height) * width * channels) {
        throw Error(ErrorCode::ShapeError, "raster data length does not match extents");
    }
    height_ = height;
    width_ = width;
    channels_ = channels;
    data_ = std::move(data);
}

std::uint8_t luma_of(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    return clamp_round(0.299 * r + 0.587 * g + 0.114 * b);
}

Raster to_luma(const Raster& img) {
    if (img.channels() != 3) {
        throw Error(ErrorCode::InvalidChannels, "to_luma expects a 3-channel raster");
    }
    Raster out(img.height(), img.width(), 1);
    const auto src = img.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = luma_of(src[3 * i], src[3 * i + 1], src[3 * i + 2]);
    }
    return out;
}

Raster rotate(const Raster& img, double angle_deg, std::uint8_t fill) {
    const double turns = angle_deg / 90.0;
    if (std::isfinite(turns) && turns == std::floor(turns)) {
        int q = static_cast<int>(std::fmod(turns, 4.0));
        if (q < 0) q += 4;
        return rotate_quarter(img, q);
    }

    const int h = img.height();
    const int w = img.width();
    const int c = img.channels();
    const double theta = angle_deg * M_PI / 180.0;
    const double cs = std::cos(theta);
    const double sn = std::sin(theta);

    const double bw = std::abs(w * cs) + std::abs(h * sn);
    const double bh = std::abs(w * sn) + std::abs(h * cs);
    const int out_w = std::max(1, static_cast<int>(std::ceil(bw - 1e-9)));
    const int out_h = std::max(1, static_cast<int>(std::ceil(bh - 1e-9)));

    const double cx_in = (w - 1) / 2.0;
    const double cy_in = (h - 1) / 2.0;
    const double cx_out = (out_w - 1) / 2.0;
    const double cy_out = (out_h - 1) / 2.0;
    constexpr double kEdge = 1e-9;

    Raster out(out_h, out_w, c, fill);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const double dx = x - cx_out;
            const double dy = y - cy_out;
            // Inverse of the counter-clockwise map in y-down coordinates.
            const double sx = cs * dx - sn * dy + cx_in;
            const double sy = sn * dx + cs * dy + cy_in;
            if (sx < -kEdge || sy < -kEdge || sx > w - 1 + kEdge || sy > h - 1 + kEdge) continue;
            const double fx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
            const double fy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
            const int x0 = static_cast<int>(fx);
            const int y0 = static_cast<int>(fy);
            const int x1 = std::min(x0 + 1, w - 1);
            const int y1 = std::min(y0 + 1, h - 1);
            const double ax = fx - x0;
            const double ay = fy - y0;
            for (int ch = 0; ch < c; ++ch) {
                const double top = img.at(y0, x0, ch) * (1 - ax) + img.at(y0, x1, ch) * ax;
                const double bot = img.at(y1, x0, ch) * (1 - ax) + img.at(y1, x1, ch) * ax;
                out.at(y, x, ch) = clamp_round(top * (1 - ay) + bot * ay);
            }
        }
    }
    return out;
}

Raster crop(const Raster& img, const AxisRect& r) {
    if (r.width < 1 || r.height < 1 || r.x0 < 0 || r.y0 < 0 ||
        r.x0 + r.width > img.width() || r.y0 + r.height > img.height()) {
        throw Error(ErrorCode::OutOfBounds,
                    "crop rect (" + std::to_string(r.x0) + "," + std::to_string(r.y0) + " " +
                        std::to_string(r.width) + "x" + std::to_string(r.height) +
                        ") exceeds raster " + std::to_string(img.width()) + "x" +
                        std::to_string(img.height()));
    }
    const int c = img.channels();
    Raster out(r.height, r.width, c);
    for (int y = 0; y < r.height; ++y) {
        const std::uint8_t* src = img.row_ptr(r.y0 + y) + static_cast<std::size_t>(r.x0) * c;
        std::copy(src, src + static_cast<std::size_t>(r.width) * c, out.row_ptr(y));
    }
    return out;
}

Raster resize_bilinear(const Raster& img, int out_height, int out_width) {
    if (img.empty()) throw Error(ErrorCode::ShapeError, "cannot resize an empty raster");
    const int h = img.height();
    const int w = img.width();
    const int c = img.channels();
    if (h == out_height && w == out_width) return img;

    const double sy_scale = static_cast<double>(h) / out_height;
    const double sx_scale = static_cast<double>(w) / out_width;

    struct Tap {
        int i0, i1;
        double a;
    };
    auto taps = [](int n_out, int n_in, double scale) {
        std::vector<Tap> t(n_out);
        for (int i = 0; i < n_out; ++i) {
            double s = (i + 0.5) * scale - 0.5;
            s = std::clamp(s, 0.0, static_cast<double>(n_in - 1));
            const int i0 = static_cast<int>(s);
            t[i] = {i0, std::min(i0 + 1, n_in - 1), s - i0};
        }
        return t;
    };
    const auto ty = taps(out_height, h, sy_scale);
    const auto tx = taps(out_width, w, sx_scale);

    Raster out(out_height, out_width, c);
    for (int y = 0; y < out_height; ++y) {
        const auto& vy = ty[y];
        for (int x = 0; x < out_width; ++x) {
            const auto& vx = tx[x];
            for (int ch = 0; ch < c; ++ch) {
                const double top = img.at(vy.i0, vx.i0, ch) * (1 - vx.a) + img.at(vy.i0, vx.i1, ch) * vx.a;
                const double bot = img.at(vy.i1, vx.i0, ch) * (1 - vx.a) + img.at(vy.i1, vx.i1, ch) * vx.a;
                out.at(y, x, ch) = clamp_round(top * (1 - vy.a) + bot * vy.a);
            }
        }
    }
    return out;
}

Raster pad_square_resize(const Raster& img, int side) {
    if (img.empty()) throw Error(ErrorCode::ShapeError, "cannot pad an empty raster");
    if (side < 1) throw Error(ErrorCode::ConfigError, "target side must be positive");
    const int h = img.height();
    const int w = img.width();
    const int c = img.channels();
    const int s = std::max(h, w);
    Raster canvas(s, s, c, 0);
    const int top = (s - h) / 2;
    const int left = (s - w) / 2;
    for (int y = 0; y < h; ++y) {
        std::copy(img.row_ptr(y), img.row_ptr(y) + static_cast<std::size_t>(w) * c,
                  canvas.row_ptr(top + y) + static_cast<std::size_t>(left) * c);
    }
    return resize_bilinear(canvas, side, side);
}

}  // namespace arc::vision
