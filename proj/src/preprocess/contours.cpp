#include "arc/preprocess/contours.hpp"

#include <array>

namespace arc::preprocess {

namespace {

// Counter-clockwise on screen (rows grow downward), starting east.
constexpr std::array<int, 8> kDr = {0, -1, -1, -1, 0, 1, 1, 1};
constexpr std::array<int, 8> kDc = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kEast = 0;
constexpr int kWest = 4;

class Labels {
public:
    explicit Labels(const BinaryMask& mask)
        : h_(mask.height() + 2), w_(mask.width() + 2),
          f_(static_cast<std::size_t>(h_) * w_, 0) {
        for (int r = 0; r < mask.height(); ++r)
            for (int c = 0; c < mask.width(); ++c)
                if (mask.get(r, c)) at(r + 1, c + 1) = 1;
    }

    int& at(int r, int c) { return f_[static_cast<std::size_t>(r) * w_ + c]; }
    int rows() const { return h_; }
    int cols() const { return w_; }

private:
    int h_;
    int w_;
    std::vector<int> f_;
};

// Traces the border starting at (r, c) whose known background neighbour lies
// in direction `from`. Appends points (padded coordinates) when `out` is set.
void trace(Labels& f, int r, int c, int from, int nbd, std::vector<PixelPoint>* out) {
    // Clockwise search for the first non-zero neighbour.
    int d1 = -1;
    for (int k = 0; k < 8; ++k) {
        const int d = (from - k + 8) % 8;
        if (f.at(r + kDr[d], c + kDc[d]) != 0) {
            d1 = d;
            break;
        }
    }
    if (d1 < 0) {
        f.at(r, c) = -nbd;
        if (out) out->push_back({r, c});
        return;
    }
    const int r1 = r + kDr[d1];
    const int c1 = c + kDc[d1];

    int r3 = r, c3 = c;
    int prev = d1;  // direction from (r3, c3) to (r2, c2)
    while (true) {
        // Counter-clockwise search starting just after (r2, c2).
        bool east_zero = false;
        int d4 = -1;
        for (int k = 1; k <= 8; ++k) {
            const int d = (prev + k) % 8;
            if (f.at(r3 + kDr[d], c3 + kDc[d]) != 0) {
                d4 = d;
                break;
            }
            if (d == kEast) east_zero = true;
        }
        const int r4 = r3 + kDr[d4];
        const int c4 = c3 + kDc[d4];

        if (east_zero) {
            f.at(r3, c3) = -nbd;
        } else if (f.at(r3, c3) == 1) {
            f.at(r3, c3) = nbd;
        }
        if (out) out->push_back({r3, c3});

        if (r4 == r && c4 == c && r3 == r1 && c3 == c1) break;
        prev = (d4 + 4) % 8;
        r3 = r4;
        c3 = c4;
    }
}

}  // namespace

std::vector<Contour> find_contours(const BinaryMask& mask) {
    std::vector<Contour> contours;
    Labels f(mask);
    int nbd = 1;
    for (int r = 1; r < f.rows() - 1; ++r) {
        for (int c = 1; c < f.cols() - 1; ++c) {
            const int v = f.at(r, c);
            if (v == 1 && f.at(r, c - 1) == 0) {
                ++nbd;
                Contour contour;
                trace(f, r, c, kWest, nbd, &contour.points);
                for (auto& p : contour.points) {
                    --p.row;
                    --p.col;
                }
                contours.push_back(std::move(contour));
            } else if (v >= 1 && f.at(r, c + 1) == 0) {
                ++nbd;
                trace(f, r, c, kEast, nbd, nullptr);
            }
        }
    }
    return contours;
}

}  // namespace arc::preprocess
