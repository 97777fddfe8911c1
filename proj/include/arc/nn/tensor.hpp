#pragma once

#include "arc/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace arc::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t element_count(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape);

/// Dense row-major array of reals.
template <typename T>
class Tensor {
public:
    using value_type = T;

    Tensor() = default;
    explicit Tensor(Shape shape, T fill = T{0})
        : shape_(std::move(shape)), data_(element_count(shape_), fill) {}
    Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != element_count(shape_)) {
            throw Error(ErrorCode::ShapeError, "tensor data length " + std::to_string(data_.size()) +
                                                   " does not match shape " + to_string(shape_));
        }
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }
    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    /// Same data under a new shape with equal element count.
    Tensor reshaped(Shape shape) const& {
        check_reshape(shape);
        return Tensor(std::move(shape), data_);
    }
    Tensor reshaped(Shape shape) && {
        check_reshape(shape);
        return Tensor(std::move(shape), std::move(data_));
    }

    bool all_finite() const noexcept {
        for (const T v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    template <typename U>
    Tensor<U> cast() const {
        return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
    }

    bool operator==(const Tensor&) const = default;

private:
    void check_reshape(const Shape& shape) const {
        if (element_count(shape) != data_.size()) {
            throw Error(ErrorCode::ShapeError,
                        "cannot reshape " + to_string(shape_) + " to " + to_string(shape));
        }
    }

    Shape shape_;
    std::vector<T> data_;
};

}  // namespace arc::nn
