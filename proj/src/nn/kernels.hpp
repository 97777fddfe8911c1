#pragma once

#include <algorithm>
#include <cstddef>
#include <cstring>

namespace arc::nn::detail {

// y += a * x
template <typename T>
inline void axpy(std::size_t n, T a, const T* __restrict x, T* __restrict y) noexcept {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

// Reductions keep kLanes independent partial sums: enough to hide add
// latency once vectorized (without -ffast-math), with a summation order that
// does not depend on the target ISA.
inline constexpr std::size_t kLanes = 32;

template <typename T>
inline T fold_lanes(T* lane) noexcept {
    for (std::size_t w = kLanes / 2; w > 0; w /= 2)
        for (std::size_t j = 0; j < w; ++j) lane[j] += lane[j + w];
    return lane[0];
}

template <typename T, typename F>
inline T lane_reduce(std::size_t n, F term) noexcept {
    T lane[kLanes] = {};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        for (std::size_t j = 0; j < kLanes; ++j) lane[j] += term(i + j);
    T tail = 0;
    for (; i < n; ++i) tail += term(i);
    return fold_lanes(lane) + tail;
}

template <typename T>
inline T dot(std::size_t n, const T* __restrict x, const T* __restrict y) noexcept {
    return lane_reduce<T>(n, [=](std::size_t i) { return x[i] * y[i]; });
}

template <typename T>
inline T sum(std::size_t n, const T* __restrict x) noexcept {
    return lane_reduce<T>(n, [=](std::size_t i) { return x[i]; });
}

/// Sum of (x[i] - c)^2.
template <typename T>
inline T sum_sq_dev(std::size_t n, const T* __restrict x, T c) noexcept {
    return lane_reduce<T>(n, [=](std::size_t i) { return (x[i] - c) * (x[i] - c); });
}

/// Sum of g[i] * min(x[i], 0).
template <typename T>
inline T dot_negative_part(std::size_t n, const T* __restrict g, const T* __restrict x) noexcept {
    return lane_reduce<T>(n, [=](std::size_t i) { return g[i] * std::min(x[i], T{0}); });
}

// Register-resident accumulators via GCC vector types; each lane of each
// vector is an independent partial sum, so results match across ISAs.
typedef float VecF __attribute__((vector_size(32)));
typedef double VecD __attribute__((vector_size(32)));

template <typename T>
struct VecOf;
template <>
struct VecOf<float> {
    using type = VecF;
};
template <>
struct VecOf<double> {
    using type = VecD;
};

template <typename T>
using Vec = typename VecOf<T>::type;

template <typename T>
inline constexpr std::size_t kVecWidth = sizeof(Vec<T>) / sizeof(T);

template <typename T>
inline Vec<T> load(const T* p) noexcept {
    Vec<T> v;
    std::memcpy(&v, p, sizeof(v));
    return v;
}

template <typename T>
inline void store(T* p, Vec<T> v) noexcept {
    std::memcpy(p, &v, sizeof(v));
}

template <typename T>
inline T hsum(Vec<T> v) noexcept {
    T s = 0;
    for (std::size_t j = 0; j < kVecWidth<T>; ++j) s += v[j];
    return s;
}

/// out[x] = bias + sum_t k[t] * src[t][x] for x in [0, n), taps applied in order.
template <typename T>
inline void conv_row(std::size_t n, std::size_t taps, T bias, const T* k, const T* const* src, T* out) noexcept {
    constexpr std::size_t W = kVecWidth<T>;
    std::size_t x0 = 0;
    for (; x0 + 4 * W <= n; x0 += 4 * W) {
        Vec<T> a0 = Vec<T>{} + bias, a1 = a0, a2 = a0, a3 = a0;
        for (std::size_t t = 0; t < taps; ++t) {
            const T* p = src[t] + x0;
            const T kt = k[t];
            a0 += kt * load(p);
            a1 += kt * load(p + W);
            a2 += kt * load(p + 2 * W);
            a3 += kt * load(p + 3 * W);
        }
        store(out + x0, a0);
        store(out + x0 + W, a1);
        store(out + x0 + 2 * W, a2);
        store(out + x0 + 3 * W, a3);
    }
    for (; x0 + W <= n; x0 += W) {
        Vec<T> a = Vec<T>{} + bias;
        for (std::size_t t = 0; t < taps; ++t) a += k[t] * load(src[t] + x0);
        store(out + x0, a);
    }
    for (; x0 < n; ++x0) {
        T a = bias;
        for (std::size_t t = 0; t < taps; ++t) a += k[t] * src[t][x0];
        out[x0] = a;
    }
}

/// sum over y < rows, x < n of a[y*as + x] * b[y*bs + x].
template <typename T>
inline T plane_dot(std::size_t rows, std::size_t n, const T* a, std::size_t as, const T* b, std::size_t bs) noexcept {
    constexpr std::size_t W = kVecWidth<T>;
    Vec<T> a0{}, a1{}, a2{}, a3{}, r{};
    T tail = 0;
    for (std::size_t y = 0; y < rows; ++y) {
        const T* pa = a + y * as;
        const T* pb = b + y * bs;
        std::size_t x = 0;
        for (; x + 4 * W <= n; x += 4 * W) {
            a0 += load(pa + x) * load(pb + x);
            a1 += load(pa + x + W) * load(pb + x + W);
            a2 += load(pa + x + 2 * W) * load(pb + x + 2 * W);
            a3 += load(pa + x + 3 * W) * load(pb + x + 3 * W);
        }
        for (; x + W <= n; x += W) r += load(pa + x) * load(pb + x);
        for (; x < n; ++x) tail += pa[x] * pb[x];
    }
    return hsum<T>((a0 + a1) + (a2 + a3) + r) + tail;
}

}  // namespace arc::nn::detail
