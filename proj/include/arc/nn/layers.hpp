#pragma once

#include "arc/common/random.hpp"
#include "arc/nn/ops.hpp"

#include <memory>
#include <string>
#include <vector>

namespace arc::nn {

enum class Mode { Train, Infer };

/// Learnable array together with the gradient slot backward() fills.
template <typename T>
struct ParamRef {
    std::string name;
    Tensor<T>* value;
    Tensor<T>* grad;
    bool decay;  ///< receives the L2 penalty
};

/// Non-learned persistent array (batch-norm running statistics).
template <typename T>
struct StateRef {
    std::string name;
    Tensor<T>* value;
};

/// One stage of the sequential chain. All tensors carry a leading batch axis.
///
/// forward() takes its input by value so callers can hand it over for caching;
/// infer() is const and reentrant.
/// backward() overwrites (does not accumulate) parameter gradients.
template <typename T>
class Layer {
public:
    explicit Layer(std::string name) : name_(std::move(name)) {}
    virtual ~Layer() = default;

    const std::string& name() const noexcept { return name_; }
    virtual std::string kind() const = 0;

    /// Per-sample output shape for a per-sample input shape.
    virtual Shape output_shape(const Shape& in) const = 0;

    virtual Tensor<T> forward(Tensor<T> x, Mode mode) = 0;
    virtual Tensor<T> infer(const Tensor<T>& x) const = 0;
    virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;

    virtual std::vector<ParamRef<T>> params() { return {}; }
    virtual std::vector<StateRef<T>> state() { return {}; }

    virtual std::unique_ptr<Layer> clone() const = 0;

private:
    std::string name_;
};

template <typename T>
class Conv2d final : public Layer<T> {
public:
    Conv2d(std::string name, std::size_t in_ch, std::size_t out_ch, std::size_t kernel = 3);

    std::string kind() const override { return "conv2d"; }
    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(Tensor<T> x, Mode mode) override;
    Tensor<T> infer(const Tensor<T>& x) const override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    std::vector<ParamRef<T>> params() override;
    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Conv2d>(*this); }

    /// The first layer of a network has no use for the input gradient.
    void set_input_grad(bool on) { need_grad_x_ = on; }

    std::size_t in_channels() const { return weight.dim(1); }
    std::size_t out_channels() const { return weight.dim(0); }

    Tensor<T> weight, bias;
    Tensor<T> grad_weight, grad_bias;

private:
    Tensor<T> input_;
    bool need_grad_x_ = true;
};

/// Per-channel normalization over the batch and spatial axes.
template <typename T>
class BatchNorm2d final : public Layer<T> {
public:
    static constexpr double kEpsilon = 1e-5;
    static constexpr double kMomentum = 0.9;

    BatchNorm2d(std::string name, std::size_t channels);

    std::string kind() const override { return "batchnorm2d"; }
    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(Tensor<T> x, Mode mode) override;
    Tensor<T> infer(const Tensor<T>& x) const override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    std::vector<ParamRef<T>> params() override;
    std::vector<StateRef<T>> state() override;
    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<BatchNorm2d>(*this); }

    Tensor<T> gamma, beta;
    Tensor<T> grad_gamma, grad_beta;
    Tensor<T> running_mean, running_var;

private:
    Tensor<T> normalize_with(const Tensor<T>& x, const std::vector<double>& mean,
                             const std::vector<double>& inv_std) const;

    Tensor<T> xhat_;
    std::vector<double> inv_std_;
    Mode cached_mode_ = Mode::Infer;
};

/// y = max(0,x) + alpha*min(0,x). alpha is either one per channel (axis 1)
/// or a single value shared by the whole layer.
template <typename T>
class PReLU final : public Layer<T> {
public:
    static constexpr double kInitialAlpha = 0.25;

    PReLU(std::string name, std::size_t alphas);

    std::string kind() const override { return "prelu"; }
    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(Tensor<T> x, Mode mode) override;
    Tensor<T> infer(const Tensor<T>& x) const override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    std::vector<ParamRef<T>> params() override;
    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<PReLU>(*this); }

    Tensor<T> alpha, grad_alpha;

private:
    std::size_t block_size(const Tensor<T>& x) const;

    Tensor<T> input_;
};

template <typename T>
class MaxPool2d final : public Layer<T> {
public:
    MaxPool2d(std::string name, std::size_t kernel, std::size_t stride);

    std::string kind() const override { return "maxpool2d"; }
    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(Tensor<T> x, Mode mode) override;
    Tensor<T> infer(const Tensor<T>& x) const override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<MaxPool2d>(*this); }

    std::size_t kernel() const { return k_; }
    std::size_t stride() const { return s_; }

private:
    std::size_t k_, s_;
    Shape input_shape_;
    std::vector<std::uint32_t> argmax_;
};

/// (N, C, H, W) -> (N, C*H*W) in channel, row, column order.
template <typename T>
class Flatten final : public Layer<T> {
public:
    explicit Flatten(std::string name) : Layer<T>(std::move(name)) {}

    std::string kind() const override { return "flatten"; }
    Shape output_shape(const Shape& in) const override { return {element_count(in)}; }
    Tensor<T> forward(Tensor<T> x, Mode mode) override;
    Tensor<T> infer(const Tensor<T>& x) const override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Flatten>(*this); }

private:
    Shape input_shape_;
};

template <typename T>
class Dense final : public Layer<T> {
public:
    Dense(std::string name, std::size_t in, std::size_t out);

    std::string kind() const override { return "dense"; }
    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(Tensor<T> x, Mode mode) override;
    Tensor<T> infer(const Tensor<T>& x) const override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    std::vector<ParamRef<T>> params() override;
    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dense>(*this); }

    std::size_t in_features() const { return weight.dim(1); }
    std::size_t out_features() const { return weight.dim(0); }

    Tensor<T> weight, bias;
    Tensor<T> grad_weight, grad_bias;

private:
    Tensor<T> input_;
};

/// Inverted dropout: survivors are scaled by 1/(1-rate) during training and
/// inference is the identity.
template <typename T>
class Dropout final : public Layer<T> {
public:
    Dropout(std::string name, double rate, std::uint64_t seed);

    std::string kind() const override { return "dropout"; }
    Shape output_shape(const Shape& in) const override { return in; }
    Tensor<T> forward(Tensor<T> x, Mode mode) override;
    Tensor<T> infer(const Tensor<T>& x) const override { return x; }
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dropout>(*this); }

    double rate() const { return rate_; }
    void reseed(std::uint64_t seed) { rng_.reseed(seed); }
    /// Keep-mask of the last training forward (1 kept, 0 dropped).
    const std::vector<std::uint8_t>& mask() const { return mask_; }

private:
    double rate_;
    Rng rng_;
    std::vector<std::uint8_t> mask_;
    bool masked_ = false;
};

template <typename T>
class Softmax final : public Layer<T> {
public:
    explicit Softmax(std::string name) : Layer<T>(std::move(name)) {}

    std::string kind() const override { return "softmax"; }
    Shape output_shape(const Shape& in) const override { return in; }
    Tensor<T> forward(Tensor<T> x, Mode mode) override;
    Tensor<T> infer(const Tensor<T>& x) const override { return softmax(x); }
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Softmax>(*this); }

private:
    Tensor<T> output_;
};

}  // namespace arc::nn
