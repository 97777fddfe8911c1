#include "arc/nn/layers.hpp"

#include "kernels.hpp"

#include <cmath>

namespace arc::nn {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw Error(ErrorCode::ShapeError, message);
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(std::string name, std::size_t in_ch, std::size_t out_ch, std::size_t kernel)
    : Layer<T>(std::move(name)),
      weight({out_ch, in_ch, kernel, kernel}),
      bias({out_ch}),
      grad_weight({out_ch, in_ch, kernel, kernel}),
      grad_bias({out_ch}) {}

template <typename T>
Shape Conv2d<T>::output_shape(const Shape& in) const {
    require(in.size() == 3, this->name() + ": expected (C,H,W), got " + to_string(in));
    require(in[0] == in_channels(), this->name() + ": expects " + std::to_string(in_channels()) +
                                        " input channels, got " + std::to_string(in[0]));
    const std::size_t k = weight.dim(2);
    require(in[1] >= k && in[2] >= k, this->name() + ": input smaller than kernel");
    return {out_channels(), in[1] - k + 1, in[2] - k + 1};
}

template <typename T>
Tensor<T> Conv2d<T>::forward(Tensor<T> x, Mode) {
    input_ = std::move(x);
    return conv2d_forward(input_, weight, bias);
}

template <typename T>
Tensor<T> Conv2d<T>::infer(const Tensor<T>& x) const {
    return conv2d_forward(x, weight, bias);
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& grad_out) {
    require(!input_.empty(), this->name() + ": backward before forward");
    auto g = conv2d_backward(input_, weight, grad_out, need_grad_x_);
    grad_weight = std::move(g.grad_weight);
    grad_bias = std::move(g.grad_bias);
    return std::move(g.grad_x);
}

template <typename T>
std::vector<ParamRef<T>> Conv2d<T>::params() {
    return {{this->name() + ".weight", &weight, &grad_weight, true},
            {this->name() + ".bias", &bias, &grad_bias, true}};
}

// ----------------------------------------------------------- BatchNorm2d

template <typename T>
BatchNorm2d<T>::BatchNorm2d(std::string name, std::size_t channels)
    : Layer<T>(std::move(name)),
      gamma({channels}, T{1}),
      beta({channels}, T{0}),
      grad_gamma({channels}),
      grad_beta({channels}),
      running_mean({channels}, T{0}),
      running_var({channels}, T{1}) {}

template <typename T>
Shape BatchNorm2d<T>::output_shape(const Shape& in) const {
    require(!in.empty() && in[0] == gamma.size(),
            this->name() + ": expects " + std::to_string(gamma.size()) + " channels, got " + to_string(in));
    return in;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::normalize_with(const Tensor<T>& x, const std::vector<double>& mean,
                                         const std::vector<double>& inv_std) const {
    const std::size_t n = x.dim(0), c = x.dim(1), inner = x.size() / (n * c);
    Tensor<T> y(x.shape());
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t base = (b * c + ch) * inner;
            const T m = static_cast<T>(mean[ch]), is = static_cast<T>(inv_std[ch]);
            const T g = gamma[ch], be = beta[ch];
            for (std::size_t i = 0; i < inner; ++i) y[base + i] = g * ((x[base + i] - m) * is) + be;
        }
    }
    return y;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::forward(Tensor<T> x, Mode mode) {
    require(x.rank() >= 2 && x.dim(1) == gamma.size(),
            this->name() + ": channel mismatch for input " + to_string(x.shape()));
    require(x.dim(0) >= 1, this->name() + ": empty batch");
    cached_mode_ = mode;
    const std::size_t n = x.dim(0), c = x.dim(1), inner = x.size() / (n * c);
    const std::size_t count = n * inner;

    std::vector<double> mean(c), var(c);
    if (mode == Mode::Infer) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            mean[ch] = running_mean[ch];
            var[ch] = running_var[ch];
        }
    } else {
        for (std::size_t ch = 0; ch < c; ++ch) {
            double s = 0.0;
            for (std::size_t b = 0; b < n; ++b) s += detail::sum(inner, x.data() + (b * c + ch) * inner);
            mean[ch] = s / static_cast<double>(count);
            // Deviations from the rounded mean; the residual shift is corrected below.
            const T m = static_cast<T>(mean[ch]);
            double ss = 0.0;
            for (std::size_t b = 0; b < n; ++b) ss += detail::sum_sq_dev(inner, x.data() + (b * c + ch) * inner, m);
            const double delta = mean[ch] - static_cast<double>(m);
            ss = std::max(0.0, ss - static_cast<double>(count) * delta * delta);
            var[ch] = ss / static_cast<double>(count);
            const double unbiased = count > 1 ? ss / static_cast<double>(count - 1) : var[ch];
            running_mean[ch] = static_cast<T>(kMomentum * running_mean[ch] + (1.0 - kMomentum) * mean[ch]);
            running_var[ch] = static_cast<T>(kMomentum * running_var[ch] + (1.0 - kMomentum) * unbiased);
        }
    }

    inv_std_.resize(c);
    for (std::size_t ch = 0; ch < c; ++ch) inv_std_[ch] = 1.0 / std::sqrt(var[ch] + kEpsilon);

    xhat_ = Tensor<T>(x.shape());
    Tensor<T> y(x.shape());
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t base = (b * c + ch) * inner;
            const T m = static_cast<T>(mean[ch]), is = static_cast<T>(inv_std_[ch]);
            const T g = gamma[ch], be = beta[ch];
            const T* src = x.data() + base;
            T* xh = xhat_.data() + base;
            T* dst = y.data() + base;
            for (std::size_t i = 0; i < inner; ++i) {
                xh[i] = (src[i] - m) * is;
                dst[i] = g * xh[i] + be;
            }
        }
    }
    return y;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::infer(const Tensor<T>& x) const {
    require(x.rank() >= 2 && x.dim(1) == gamma.size(),
            this->name() + ": channel mismatch for input " + to_string(x.shape()));
    const std::size_t c = gamma.size();
    std::vector<double> mean(c), inv_std(c);
    for (std::size_t ch = 0; ch < c; ++ch) {
        mean[ch] = running_mean[ch];
        inv_std[ch] = 1.0 / std::sqrt(static_cast<double>(running_var[ch]) + kEpsilon);
    }
    return normalize_with(x, mean, inv_std);
}

template <typename T>
Tensor<T> BatchNorm2d<T>::backward(const Tensor<T>& grad_out) {
    require(grad_out.shape() == xhat_.shape(), this->name() + ": backward shape mismatch");
    const std::size_t n = grad_out.dim(0), c = grad_out.dim(1), inner = grad_out.size() / (n * c);
    const double count = static_cast<double>(n * inner);
    Tensor<T> gx(grad_out.shape());
    for (std::size_t ch = 0; ch < c; ++ch) {
        double sum_g = 0.0, sum_gx = 0.0;
        for (std::size_t b = 0; b < n; ++b) {
            const std::size_t base = (b * c + ch) * inner;
            const T* go = grad_out.data() + base;
            const T* xh = xhat_.data() + base;
            sum_g += detail::sum(inner, go);
            sum_gx += detail::dot(inner, go, xh);
        }
        grad_gamma[ch] = static_cast<T>(sum_gx);
        grad_beta[ch] = static_cast<T>(sum_g);
        const T k = static_cast<T>(static_cast<double>(gamma[ch]) * inv_std_[ch]);
        const bool batch_stats = cached_mode_ == Mode::Train;
        const T mg = batch_stats ? static_cast<T>(sum_g / count) : T{0};
        const T mgx = batch_stats ? static_cast<T>(sum_gx / count) : T{0};
        for (std::size_t b = 0; b < n; ++b) {
            const std::size_t base = (b * c + ch) * inner;
            const T* go = grad_out.data() + base;
            const T* xh = xhat_.data() + base;
            T* dst = gx.data() + base;
            for (std::size_t i = 0; i < inner; ++i) dst[i] = k * (go[i] - mg - xh[i] * mgx);
        }
    }
    return gx;
}

template <typename T>
std::vector<ParamRef<T>> BatchNorm2d<T>::params() {
    return {{this->name() + ".gamma", &gamma, &grad_gamma, false},
            {this->name() + ".beta", &beta, &grad_beta, false}};
}

template <typename T>
std::vector<StateRef<T>> BatchNorm2d<T>::state() {
    return {{this->name() + ".running_mean", &running_mean}, {this->name() + ".running_var", &running_var}};
}

// ----------------------------------------------------------------- PReLU

template <typename T>
PReLU<T>::PReLU(std::string name, std::size_t alphas)
    : Layer<T>(std::move(name)), alpha({alphas}, static_cast<T>(kInitialAlpha)), grad_alpha({alphas}) {
    require(alphas >= 1, this->name() + ": needs at least one alpha");
}

template <typename T>
Shape PReLU<T>::output_shape(const Shape& in) const {
    require(!in.empty(), this->name() + ": empty input shape");
    require(alpha.size() == 1 || in[0] == alpha.size(),
            this->name() + ": " + std::to_string(alpha.size()) + " alphas for input " + to_string(in));
    return in;
}

template <typename T>
std::size_t PReLU<T>::block_size(const Tensor<T>& x) const {
    require(x.rank() >= 2, this->name() + ": expected batched input");
    if (alpha.size() == 1) return x.size() / x.dim(0);
    require(x.dim(1) == alpha.size(),
            this->name() + ": " + std::to_string(alpha.size()) + " alphas for input " + to_string(x.shape()));
    return x.size() / (x.dim(0) * x.dim(1));
}

template <typename T>
Tensor<T> PReLU<T>::forward(Tensor<T> x, Mode) {
    input_ = std::move(x);
    return infer(input_);
}

template <typename T>
Tensor<T> PReLU<T>::infer(const Tensor<T>& x) const {
    const std::size_t block = block_size(x);
    const std::size_t a = alpha.size();
    Tensor<T> y(x.shape());
    for (std::size_t start = 0, blk = 0; start < x.size(); start += block, ++blk) {
        const T al = alpha[blk % a];
        const T* src = x.data() + start;
        T* dst = y.data() + start;
        for (std::size_t i = 0; i < block; ++i) {
            const T v = src[i];
            dst[i] = std::max(v, T{0}) + al * std::min(v, T{0});
        }
    }
    return y;
}

template <typename T>
Tensor<T> PReLU<T>::backward(const Tensor<T>& grad_out) {
    require(grad_out.shape() == input_.shape(), this->name() + ": backward shape mismatch");
    const std::size_t block = block_size(input_);
    const std::size_t a = alpha.size();
    Tensor<T> gx(grad_out.shape());
    std::vector<double> ga(a, 0.0);
    for (std::size_t start = 0, blk = 0; start < gx.size(); start += block, ++blk) {
        const T al = alpha[blk % a];
        const T* in = input_.data() + start;
        const T* go = grad_out.data() + start;
        T* dst = gx.data() + start;
        for (std::size_t i = 0; i < block; ++i) {
            const T slope = in[i] > T{0} ? T{1} : al;
            dst[i] = slope * go[i];
        }
        ga[blk % a] += detail::dot_negative_part(block, go, in);
    }
    for (std::size_t ch = 0; ch < a; ++ch) grad_alpha[ch] = static_cast<T>(ga[ch]);
    return gx;
}

template <typename T>
std::vector<ParamRef<T>> PReLU<T>::params() {
    return {{this->name() + ".alpha", &alpha, &grad_alpha, false}};
}

// ------------------------------------------------------------- MaxPool2d

template <typename T>
MaxPool2d<T>::MaxPool2d(std::string name, std::size_t kernel, std::size_t stride)
    : Layer<T>(std::move(name)), k_(kernel), s_(stride) {
    require(kernel >= 1 && stride >= 1, this->name() + ": kernel and stride must be positive");
}

template <typename T>
Shape MaxPool2d<T>::output_shape(const Shape& in) const {
    require(in.size() == 3, this->name() + ": expected (C,H,W), got " + to_string(in));
    require(k_ <= in[1] && k_ <= in[2], this->name() + ": window larger than input " + to_string(in));
    return {in[0], (in[1] - k_) / s_ + 1, (in[2] - k_) / s_ + 1};
}

template <typename T>
Tensor<T> MaxPool2d<T>::forward(Tensor<T> x, Mode) {
    auto r = maxpool_forward(x, k_, s_);
    input_shape_ = x.shape();
    argmax_ = std::move(r.argmax);
    return std::move(r.out);
}

template <typename T>
Tensor<T> MaxPool2d<T>::infer(const Tensor<T>& x) const {
    return maxpool_forward(x, k_, s_).out;
}

template <typename T>
Tensor<T> MaxPool2d<T>::backward(const Tensor<T>& grad_out) {
    return maxpool_backward(grad_out, argmax_, input_shape_);
}

// --------------------------------------------------------------- Flatten

template <typename T>
Tensor<T> Flatten<T>::forward(Tensor<T> x, Mode) {
    require(x.rank() >= 1, this->name() + ": empty shape");
    input_shape_ = x.shape();
    const std::size_t n = x.dim(0);
    const std::size_t features = n == 0 ? 0 : x.size() / n;
    return std::move(x).reshaped({n, features});
}

template <typename T>
Tensor<T> Flatten<T>::infer(const Tensor<T>& x) const {
    require(x.rank() >= 1, this->name() + ": empty shape");
    const std::size_t n = x.dim(0);
    return x.reshaped({n, n == 0 ? 0 : x.size() / n});
}

template <typename T>
Tensor<T> Flatten<T>::backward(const Tensor<T>& grad_out) {
    return grad_out.reshaped(input_shape_);
}

// ----------------------------------------------------------------- Dense

template <typename T>
Dense<T>::Dense(std::string name, std::size_t in, std::size_t out)
    : Layer<T>(std::move(name)), weight({out, in}), bias({out}), grad_weight({out, in}), grad_bias({out}) {}

template <typename T>
Shape Dense<T>::output_shape(const Shape& in) const {
    require(in.size() == 1 && in[0] == in_features(),
            this->name() + ": expects " + std::to_string(in_features()) + " features, got " + to_string(in));
    return {out_features()};
}

template <typename T>
Tensor<T> Dense<T>::forward(Tensor<T> x, Mode) {
    input_ = std::move(x);
    return dense_forward(input_, weight, bias);
}

template <typename T>
Tensor<T> Dense<T>::infer(const Tensor<T>& x) const {
    return dense_forward(x, weight, bias);
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& grad_out) {
    auto g = dense_backward(input_, weight, grad_out);
    grad_weight = std::move(g.grad_weight);
    grad_bias = std::move(g.grad_bias);
    return std::move(g.grad_x);
}

template <typename T>
std::vector<ParamRef<T>> Dense<T>::params() {
    return {{this->name() + ".weight", &weight, &grad_weight, true},
            {this->name() + ".bias", &bias, &grad_bias, true}};
}

// --------------------------------------------------------------- Dropout

template <typename T>
Dropout<T>::Dropout(std::string name, double rate, std::uint64_t seed)
    : Layer<T>(std::move(name)), rate_(rate), rng_(seed) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw Error(ErrorCode::ConfigError, this->name() + ": dropout rate must be in [0, 1)");
    }
}

template <typename T>
Tensor<T> Dropout<T>::forward(Tensor<T> x, Mode mode) {
    masked_ = mode == Mode::Train && rate_ > 0.0;
    if (!masked_) return x;
    mask_.resize(x.size());
    const T scale = static_cast<T>(1.0 / (1.0 - rate_));
    Tensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mask_[i] = rng_.uniform() >= rate_ ? 1 : 0;
        y[i] = mask_[i] ? x[i] * scale : T{0};
    }
    return y;
}

template <typename T>
Tensor<T> Dropout<T>::backward(const Tensor<T>& grad_out) {
    if (!masked_) return grad_out;
    require(grad_out.size() == mask_.size(), this->name() + ": backward shape mismatch");
    const T scale = static_cast<T>(1.0 / (1.0 - rate_));
    Tensor<T> g(grad_out.shape());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = mask_[i] ? grad_out[i] * scale : T{0};
    return g;
}

// --------------------------------------------------------------- Softmax

template <typename T>
Tensor<T> Softmax<T>::forward(Tensor<T> x, Mode) {
    output_ = softmax(x);
    return output_;
}

template <typename T>
Tensor<T> Softmax<T>::backward(const Tensor<T>& grad_out) {
    return softmax_backward(output_, grad_out);
}

#define ARC_INSTANTIATE_LAYERS(T) \
    template class Conv2d<T>;     \
    template class BatchNorm2d<T>; \
    template class PReLU<T>;      \
    template class MaxPool2d<T>;  \
    template class Flatten<T>;    \
    template class Dense<T>;      \
    template class Dropout<T>;    \
    template class Softmax<T>;

ARC_INSTANTIATE_LAYERS(float)
ARC_INSTANTIATE_LAYERS(double)

}  // namespace arc::nn
