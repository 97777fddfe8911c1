#include "arc/preprocess/morphology.hpp"

#include "arc/common/error.hpp"

#include <algorithm>
#include <vector>

namespace arc::preprocess {

namespace {

// Rectangles are separable: a row pass then a column pass. Running counts
// keep each pass linear in the image size.
BinaryMask sweep(const BinaryMask& mask, StructuringRect se, bool dilating) {
    if (se.height < 1 || se.width < 1 || se.height % 2 == 0 || se.width % 2 == 0) {
        throw Error(ErrorCode::ConfigError, "structuring element must have odd positive extents");
    }
    const int h = mask.height();
    const int w = mask.width();
    const int rx = se.width / 2;
    const int ry = se.height / 2;
    // Erosion of A equals the complement of dilating the complement; the
    // out-of-bounds convention flips with it.
    auto value = [&](const BinaryMask& m, int r, int c) -> int {
        const bool v = m.get(r, c);
        return dilating ? v : !v;
    };

    BinaryMask rows(h, w);
    std::vector<int> prefix(static_cast<std::size_t>(std::max(h, w)) + 1);
    for (int r = 0; r < h; ++r) {
        prefix[0] = 0;
        for (int c = 0; c < w; ++c) prefix[c + 1] = prefix[c] + value(mask, r, c);
        for (int c = 0; c < w; ++c) {
            const int lo = std::max(0, c - rx);
            const int hi = std::min(w, c + rx + 1);
            rows.set(r, c, prefix[hi] - prefix[lo] > 0);
        }
    }
    BinaryMask out(h, w);
    for (int c = 0; c < w; ++c) {
        prefix[0] = 0;
        for (int r = 0; r < h; ++r) prefix[r + 1] = prefix[r] + rows.get(r, c);
        for (int r = 0; r < h; ++r) {
            const int lo = std::max(0, r - ry);
            const int hi = std::min(h, r + ry + 1);
            const bool hit = prefix[hi] - prefix[lo] > 0;
            out.set(r, c, dilating ? hit : !hit);
        }
    }
    return out;
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, StructuringRect se) { return sweep(mask, se, true); }

BinaryMask erode(const BinaryMask& mask, StructuringRect se) { return sweep(mask, se, false); }

BinaryMask morph_close(const BinaryMask& mask, StructuringRect se) {
    return erode(dilate(mask, se), se);
}

}  // namespace arc::preprocess
