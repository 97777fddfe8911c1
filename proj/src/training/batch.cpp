#include "arc/training/batch.hpp"

#include "arc/common/error.hpp"
#include "arc/common/log.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

namespace arc::training {

void write_planar(const vision::Raster& img, float* dst) {
    if (img.channels() != 3) throw Error(ErrorCode::ShapeError, "training images must be RGB");
    const std::size_t plane = static_cast<std::size_t>(img.height()) * img.width();
    const auto px = img.data();
    for (std::size_t i = 0; i < plane; ++i) {
        dst[i] = px[3 * i] / 255.0f;
        dst[plane + i] = px[3 * i + 1] / 255.0f;
        dst[2 * plane + i] = px[3 * i + 2] / 255.0f;
    }
}

nn::Tensor<float> images_to_tensor(std::span<const vision::Raster* const> images) {
    if (images.empty()) throw Error(ErrorCode::ShapeError, "no images to batch");
    const int h = images[0]->height(), w = images[0]->width();
    nn::Tensor<float> out({images.size(), 3, static_cast<std::size_t>(h), static_cast<std::size_t>(w)});
    const std::size_t stride = 3 * static_cast<std::size_t>(h) * w;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i]->height() != h || images[i]->width() != w) {
            throw Error(ErrorCode::ShapeError, "images in a batch must share one size");
        }
        write_planar(*images[i], out.data() + i * stride);
    }
    return out;
}

nn::Tensor<float> images_to_tensor(std::span<const LabeledImage> items) {
    std::vector<const vision::Raster*> ptrs;
    ptrs.reserve(items.size());
    for (const auto& it : items) ptrs.push_back(&it.image);
    return images_to_tensor(ptrs);
}

nn::Tensor<float> one_hot(std::span<const std::size_t> labels, std::size_t classes) {
    nn::Tensor<float> out({labels.size(), classes});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= classes) {
            throw Error(ErrorCode::InvalidLabel, "label " + std::to_string(labels[i]) + " out of range");
        }
        out[i * classes + labels[i]] = 1.0f;
    }
    return out;
}

Minibatch make_minibatch(std::span<const LabeledImage> pool, std::span<const std::size_t> picks, std::size_t classes,
                         Rng& rng) {
    static constexpr int kAngles[] = {90, 180, 270};
    Minibatch b;
    b.source.assign(picks.begin(), picks.end());
    std::vector<vision::Raster> rotated;
    rotated.reserve(picks.size());
    std::vector<const vision::Raster*> ptrs;
    for (const std::size_t p : picks) {
        const auto& item = pool[p];
        ptrs.push_back(&item.image);
        b.labels.push_back(item.label);
    }
    for (const std::size_t p : picks) {
        const int angle = kAngles[rng.uniform_int(3)];
        b.rotations.push_back(angle);
        rotated.push_back(vision::rotate(pool[p].image, angle));
        b.labels.push_back(pool[p].label);
    }
    for (const auto& r : rotated) ptrs.push_back(&r);
    b.images = images_to_tensor(ptrs);
    b.onehot = one_hot(b.labels, classes);
    return b;
}

Minibatch assemble_minibatch(std::span<const LabeledImage> pool, std::size_t classes, Rng& rng, std::size_t half) {
    if (pool.empty()) throw Error(ErrorCode::ConfigError, "cannot draw a minibatch from an empty pool");
    std::vector<std::size_t> picks;
    if (pool.size() < half) {
        log::warn("pool of " + std::to_string(pool.size()) + " is smaller than " + std::to_string(half) +
                  "; resampling with replacement");
        for (std::size_t i = 0; i < half; ++i) picks.push_back(rng.uniform_int(pool.size()));
    } else {
        // Partial Fisher-Yates over an index table.
        std::vector<std::size_t> idx(pool.size());
        std::iota(idx.begin(), idx.end(), 0);
        for (std::size_t i = 0; i < half; ++i) {
            std::swap(idx[i], idx[i + rng.uniform_int(idx.size() - i)]);
            picks.push_back(idx[i]);
        }
    }
    return make_minibatch(pool, picks, classes, rng);
}

std::vector<std::vector<std::size_t>> epoch_groups(std::size_t n, std::size_t half, Rng& rng) {
    if (half == 0 || n < half) throw Error(ErrorCode::ConfigError, "not enough items for one minibatch");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order.begin(), order.end());
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; i += half) {
        std::vector<std::size_t> g(order.begin() + i, order.begin() + std::min(n, i + half));
        if (g.size() < half) {
            // Top up from the items already seen this epoch, without repeats.
            std::vector<std::size_t> rest(order.begin(), order.begin() + i);
            for (std::size_t k = 0; g.size() < half; ++k) {
                std::swap(rest[k], rest[k + rng.uniform_int(rest.size() - k)]);
                g.push_back(rest[k]);
            }
        }
        groups.push_back(std::move(g));
    }
    return groups;
}

}  // namespace arc::training
