#include "arc/nn/ops.hpp"

#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace arc::nn {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw Error(ErrorCode::ShapeError, message);
}

}  // namespace

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
    require(x.rank() == 4, "conv2d expects (N,C,H,W), got " + to_string(x.shape()));
    require(weight.rank() == 4, "conv2d weight must be (out,in,kh,kw)");
    const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t cout = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
    require(weight.dim(1) == cin, "conv2d channel mismatch: input has " + std::to_string(cin) +
                                      ", kernels expect " + std::to_string(weight.dim(1)));
    require(bias.size() == cout, "conv2d bias length mismatch");
    require(h >= kh && w >= kw, "conv2d input smaller than kernel");
    const std::size_t oh = h - kh + 1, ow = w - kw + 1;
    const std::size_t taps = cin * kh * kw;

    Tensor<T> out({n, cout, oh, ow});
    const T* xd = x.data();
    const T* wd = weight.data();
    T* od = out.data();
    std::vector<const T*> src(taps);
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t y = 0; y < oh; ++y) {
            std::size_t t = 0;
            for (std::size_t i = 0; i < cin; ++i)
                for (std::size_t ky = 0; ky < kh; ++ky)
                    for (std::size_t kx = 0; kx < kw; ++kx) src[t++] = xd + ((b * cin + i) * h + y + ky) * w + kx;
            for (std::size_t o = 0; o < cout; ++o) {
                detail::conv_row(ow, taps, bias[o], wd + o * taps, src.data(), od + ((b * cout + o) * oh + y) * ow);
            }
        }
    }
    return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& grad_out,
                             bool need_grad_x) {
    require(x.rank() == 4 && weight.rank() == 4 && grad_out.rank() == 4, "conv2d_backward expects 4-d tensors");
    const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t cout = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
    require(weight.dim(1) == cin, "conv2d_backward channel mismatch");
    const std::size_t oh = h - kh + 1, ow = w - kw + 1;
    require(grad_out.shape() == Shape({n, cout, oh, ow}),
            "conv2d_backward grad shape " + to_string(grad_out.shape()) + " does not match forward output");
    const std::size_t taps = cin * kh * kw;

    ConvGrads<T> g;
    g.grad_weight = Tensor<T>(weight.shape());
    g.grad_bias = Tensor<T>({cout});
    if (need_grad_x) g.grad_x = Tensor<T>(x.shape());

    const T* xd = x.data();
    const T* wd = weight.data();
    const T* gd = grad_out.data();
    T* gw = g.grad_weight.data();

    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t o = 0; o < cout; ++o) {
            const T* gplane = gd + (b * cout + o) * oh * ow;
            g.grad_bias[o] += detail::sum(oh * ow, gplane);
            std::size_t t = 0;
            for (std::size_t i = 0; i < cin; ++i)
                for (std::size_t ky = 0; ky < kh; ++ky)
                    for (std::size_t kx = 0; kx < kw; ++kx, ++t) {
                        const T* in = xd + ((b * cin + i) * h + ky) * w + kx;
                        gw[o * taps + t] += detail::plane_dot(oh, ow, gplane, ow, in, w);
                    }
        }
        if (!need_grad_x) continue;
        // grad_x[i, y+ky, kx+x] += w[o,i,ky,kx] * grad_out[o, y, x]
        T* gx = g.grad_x.data();
        for (std::size_t i = 0; i < cin; ++i) {
            for (std::size_t o = 0; o < cout; ++o) {
                const T* k = wd + (o * cin + i) * kh * kw;
                for (std::size_t y = 0; y < oh; ++y) {
                    const T* grow = gd + ((b * cout + o) * oh + y) * ow;
                    for (std::size_t ky = 0; ky < kh; ++ky) {
                        T* dst = gx + ((b * cin + i) * h + y + ky) * w;
                        for (std::size_t kx = 0; kx < kw; ++kx) detail::axpy(ow, k[ky * kw + kx], grow, dst + kx);
                    }
                }
            }
        }
    }
    return g;
}

template <typename T>
PoolResult<T> maxpool_forward(const Tensor<T>& x, std::size_t k, std::size_t s) {
    require(x.rank() == 4, "maxpool expects (N,C,H,W)");
    require(k >= 1 && s >= 1, "maxpool window and stride must be positive");
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    require(k <= h && k <= w, "maxpool window " + std::to_string(k) + " larger than input " + to_string(x.shape()));
    const std::size_t oh = (h - k) / s + 1, ow = (w - k) / s + 1;

    PoolResult<T> r{Tensor<T>({n, c, oh, ow}), std::vector<std::uint32_t>(n * c * oh * ow)};
    const T* xd = x.data();
    T* od = r.out.data();
    // Window cells are visited in row-major order for every output column at
    // once; a strict comparison keeps the first maximum.
    std::vector<T> best_v(ow);
    std::vector<std::uint32_t> best_i(ow);
    for (std::size_t plane = 0; plane < n * c; ++plane) {
        const std::size_t base = plane * h * w;
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t dy = 0; dy < k; ++dy) {
                const std::size_t row = base + (y * s + dy) * w;
                const T* src = xd + row;
                for (std::size_t dx = 0; dx < k; ++dx) {
                    if (dy == 0 && dx == 0) {
                        for (std::size_t xx = 0; xx < ow; ++xx) {
                            best_v[xx] = src[xx * s];
                            best_i[xx] = static_cast<std::uint32_t>(row + xx * s);
                        }
                        continue;
                    }
                    for (std::size_t xx = 0; xx < ow; ++xx) {
                        const T v = src[xx * s + dx];
                        const bool better = v > best_v[xx];
                        best_v[xx] = better ? v : best_v[xx];
                        best_i[xx] = better ? static_cast<std::uint32_t>(row + xx * s + dx) : best_i[xx];
                    }
                }
            }
            const std::size_t o = (plane * oh + y) * ow;
            std::copy(best_v.begin(), best_v.end(), od + o);
            std::copy(best_i.begin(), best_i.end(), r.argmax.begin() + static_cast<std::ptrdiff_t>(o));
        }
    }
    return r;
}

template <typename T>
Tensor<T> maxpool_backward(const Tensor<T>& grad_out, const std::vector<std::uint32_t>& argmax,
                           const Shape& input_shape) {
    require(grad_out.size() == argmax.size(), "maxpool_backward argmax/grad mismatch");
    Tensor<T> gx(input_shape);
    for (std::size_t i = 0; i < argmax.size(); ++i) gx[argmax[i]] += grad_out[i];
    return gx;
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
    require(x.rank() == 2, "dense expects (N,F), got " + to_string(x.shape()));
    const std::size_t n = x.dim(0), in = x.dim(1), out = weight.dim(0);
    require(weight.rank() == 2 && weight.dim(1) == in,
            "dense input length " + std::to_string(in) + " does not match weight " + to_string(weight.shape()));
    require(bias.size() == out, "dense bias length mismatch");
    Tensor<T> y({n, out});
    // Output-major so each weight row is read from memory once per batch.
    for (std::size_t o = 0; o < out; ++o) {
        const T* wr = weight.data() + o * in;
        for (std::size_t b = 0; b < n; ++b) y[b * out + o] = bias[o] + detail::dot(in, wr, x.data() + b * in);
    }
    return y;
}

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& grad_out) {
    const std::size_t n = x.dim(0), in = x.dim(1), out = weight.dim(0);
    require(grad_out.shape() == Shape({n, out}), "dense_backward grad shape mismatch");
    DenseGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(weight.shape()), Tensor<T>({out})};
    for (std::size_t o = 0; o < out; ++o) {
        const T* wr = weight.data() + o * in;
        T* gwr = g.grad_weight.data() + o * in;
        for (std::size_t b = 0; b < n; ++b) {
            const T go = grad_out[b * out + o];
            if (go == T{0}) continue;
            g.grad_bias[o] += go;
            detail::axpy(in, go, x.data() + b * in, gwr);
            detail::axpy(in, go, wr, g.grad_x.data() + b * in);
        }
    }
    return g;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& z) {
    require(z.rank() == 2 || z.rank() == 1, "softmax expects (N,K) or (K)");
    const std::size_t k = z.shape().back();
    const std::size_t rows = z.size() / std::max<std::size_t>(k, 1);
    Tensor<T> y(z.shape());
    for (std::size_t r = 0; r < rows; ++r) {
        const T* zr = z.data() + r * k;
        T* yr = y.data() + r * k;
        const T m = *std::max_element(zr, zr + k);
        T sum = 0;
        for (std::size_t j = 0; j < k; ++j) {
            yr[j] = std::exp(zr[j] - m);
            sum += yr[j];
        }
        for (std::size_t j = 0; j < k; ++j) yr[j] /= sum;
    }
    return y;
}

template <typename T>
Tensor<T> softmax_backward(const Tensor<T>& y, const Tensor<T>& grad_y) {
    require(y.shape() == grad_y.shape(), "softmax_backward shape mismatch");
    const std::size_t k = y.shape().back();
    const std::size_t rows = y.size() / std::max<std::size_t>(k, 1);
    Tensor<T> gz(y.shape());
    for (std::size_t r = 0; r < rows; ++r) {
        const T* yr = y.data() + r * k;
        const T* gr = grad_y.data() + r * k;
        T s = 0;
        for (std::size_t j = 0; j < k; ++j) s += gr[j] * yr[j];
        for (std::size_t j = 0; j < k; ++j) gz[r * k + j] = yr[j] * (gr[j] - s);
    }
    return gz;
}

namespace {

template <typename T>
void check_onehot(const Tensor<T>& probs, const Tensor<T>& onehot) {
    if (probs.shape() != onehot.shape()) {
        throw Error(ErrorCode::ShapeError, "prediction " + to_string(probs.shape()) + " vs label " +
                                               to_string(onehot.shape()));
    }
    const std::size_t k = onehot.shape().back();
    for (std::size_t r = 0; r < onehot.size() / k; ++r) {
        int ones = 0;
        for (std::size_t j = 0; j < k; ++j) {
            const T v = onehot[r * k + j];
            if (v == T{1}) {
                ++ones;
            } else if (v != T{0}) {
                throw Error(ErrorCode::InvalidLabel, "label row " + std::to_string(r) + " is not one-hot");
            }
        }
        if (ones != 1) throw Error(ErrorCode::InvalidLabel, "label row " + std::to_string(r) + " is not one-hot");
    }
}

}  // namespace

template <typename T>
double cross_entropy(const Tensor<T>& probs, const Tensor<T>& onehot) {
    check_onehot(probs, onehot);
    const std::size_t k = probs.shape().back();
    const std::size_t rows = probs.size() / k;
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (onehot[i] == T{0}) continue;
        total -= std::log(std::max(static_cast<double>(probs[i]), kProbabilityFloor));
    }
    return total / static_cast<double>(rows);
}

template <typename T>
Tensor<T> cross_entropy_logit_grad(const Tensor<T>& probs, const Tensor<T>& onehot) {
    check_onehot(probs, onehot);
    const std::size_t rows = probs.size() / probs.shape().back();
    Tensor<T> g(probs.shape());
    const T scale = T{1} / static_cast<T>(rows);
    for (std::size_t i = 0; i < probs.size(); ++i) g[i] = (probs[i] - onehot[i]) * scale;
    return g;
}

#define ARC_INSTANTIATE_OPS(T)                                                                          \
    template Tensor<T> conv2d_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);           \
    template ConvGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, bool); \
    template PoolResult<T> maxpool_forward(const Tensor<T>&, std::size_t, std::size_t);                \
    template Tensor<T> maxpool_backward(const Tensor<T>&, const std::vector<std::uint32_t>&,           \
                                        const Shape&);                                                  \
    template Tensor<T> dense_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);            \
    template DenseGrads<T> dense_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);       \
    template Tensor<T> softmax(const Tensor<T>&);                                                       \
    template Tensor<T> softmax_backward(const Tensor<T>&, const Tensor<T>&);                            \
    template double cross_entropy(const Tensor<T>&, const Tensor<T>&);                                  \
    template Tensor<T> cross_entropy_logit_grad(const Tensor<T>&, const Tensor<T>&);

ARC_INSTANTIATE_OPS(float)
ARC_INSTANTIATE_OPS(double)

}  // namespace arc::nn
