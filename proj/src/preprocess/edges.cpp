#include "arc/preprocess/edges.hpp"

#include "arc/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace arc::preprocess {

double Gradient::magnitude(std::size_t i) const noexcept {
    const double x = gx[i];
    const double y = gy[i];
    return std::sqrt(x * x + y * y);
}

Gradient sobel(const vision::Raster& gray) {
    if (gray.channels() != 1) {
        throw Error(ErrorCode::InvalidChannels, "sobel expects a 1-channel raster");
    }
    const int h = gray.height();
    const int w = gray.width();
    Gradient g{h, w, std::vector<int>(static_cast<std::size_t>(h) * w),
               std::vector<int>(static_cast<std::size_t>(h) * w)};
    auto px = [&](int r, int c) -> int {
        r = std::clamp(r, 0, h - 1);
        c = std::clamp(c, 0, w - 1);
        return gray.at(r, c);
    };
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const int tl = px(r - 1, c - 1), t = px(r - 1, c), tr = px(r - 1, c + 1);
            const int l = px(r, c - 1), rr = px(r, c + 1);
            const int bl = px(r + 1, c - 1), b = px(r + 1, c), br = px(r + 1, c + 1);
            const std::size_t i = static_cast<std::size_t>(r) * w + c;
            g.gx[i] = (tr + 2 * rr + br) - (tl + 2 * l + bl);
            g.gy[i] = (bl + 2 * b + br) - (tl + 2 * t + tr);
        }
    }
    return g;
}

std::vector<double> non_max_suppression(const Gradient& g) {
    const int h = g.height;
    const int w = g.width;
    std::vector<double> mag(static_cast<std::size_t>(h) * w);
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = g.magnitude(i);

    auto at = [&](int r, int c) -> double {
        if (r < 0 || c < 0 || r >= h || c >= w) return 0.0;
        return mag[static_cast<std::size_t>(r) * w + c];
    };

    // tan(22.5 deg) and tan(67.5 deg) bound the four direction sectors.
    const double tan22 = std::tan(M_PI / 8.0);
    const double tan67 = std::tan(3.0 * M_PI / 8.0);

    std::vector<double> out(mag.size(), 0.0);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * w + c;
            const double m = mag[i];
            if (m == 0.0) continue;
            const double ax = std::abs(static_cast<double>(g.gx[i]));
            const double ay = std::abs(static_cast<double>(g.gy[i]));
            int dr, dc;  // forward neighbour offset along the gradient axis
            if (ay <= ax * tan22) {
                dr = 0, dc = 1;
            } else if (ay >= ax * tan67) {
                dr = 1, dc = 0;
            } else if ((g.gx[i] > 0) == (g.gy[i] > 0)) {
                dr = 1, dc = 1;
            } else {
                dr = 1, dc = -1;
            }
            const double back = at(r - dr, c - dc);
            const double fwd = at(r + dr, c + dc);
            if (m > back && m >= fwd) out[i] = m;
        }
    }
    return out;
}

BinaryMask hysteresis(const std::vector<double>& magnitude, int height, int width,
                      double low, double high) {
    BinaryMask mask(height, width);
    std::deque<std::pair<int, int>> queue;
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            if (magnitude[static_cast<std::size_t>(r) * width + c] >= high) {
                mask.set(r, c);
                queue.emplace_back(r, c);
            }
        }
    }
    while (!queue.empty()) {
        const auto [r, c] = queue.front();
        queue.pop_front();
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                const int nr = r + dr;
                const int nc = c + dc;
                if (!mask.inside(nr, nc) || mask.get(nr, nc)) continue;
                if (magnitude[static_cast<std::size_t>(nr) * width + nc] >= low) {
                    mask.set(nr, nc);
                    queue.emplace_back(nr, nc);
                }
            }
        }
    }
    return mask;
}

BinaryMask canny(const vision::Raster& gray, double low, double high) {
    if (!(low < high)) throw Error(ErrorCode::ConfigError, "canny requires low < high");
    const Gradient g = sobel(gray);
    return hysteresis(non_max_suppression(g), g.height, g.width, low, high);
}

}  // namespace arc::preprocess
