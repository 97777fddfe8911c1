#pragma once

#include "arc/nn/layers.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace arc::nn {

/// Hyperparameters of the sequential identification chain:
/// [conv -> bn -> prelu -> pool] per conv stage, flatten, then
/// [dense -> prelu -> dropout] per hidden layer, then dense -> softmax.
struct NetworkSpec {
    Shape input{3, 150, 150};
    std::vector<std::size_t> conv_channels{8, 8};
    std::vector<std::size_t> pools{4, 2};  ///< kernel == stride
    std::size_t kernel = 3;
    std::vector<std::size_t> hidden{512, 256};
    std::size_t classes = 100;
    double dropout = 0.1;

    /// The production chain with `classes` outputs.
    static NetworkSpec arc(std::size_t classes = 100);
    /// Small clone with every layer type, for finite-difference checks.
    static NetworkSpec gradient_check();

    nlohmann::json to_json() const;
    static NetworkSpec from_json(const nlohmann::json& j);
    bool operator==(const NetworkSpec&) const = default;
};

/// Sequential network. Inputs are (N, C, H, W) batches; outputs (N, classes)
/// probabilities.
template <typename T>
class Network {
public:
    Network(const NetworkSpec& spec, std::uint64_t seed);
    Network(const Network& other);
    Network& operator=(const Network& other);
    Network(Network&&) noexcept = default;
    Network& operator=(Network&&) noexcept = default;

    const NetworkSpec& spec() const { return spec_; }

    void set_mode(Mode mode) { mode_ = mode; }
    Mode mode() const { return mode_; }

    /// Caching forward in the current mode.
    Tensor<T> forward(const Tensor<T>& x);
    /// Like forward(), also returning every layer's output (index i = layer i).
    std::vector<Tensor<T>> forward_trace(const Tensor<T>& x);
    /// Pure inference with running statistics and no dropout; safe to call
    /// concurrently on a shared network.
    Tensor<T> infer(const Tensor<T>& x) const;

    /// Backpropagates d(loss)/d(probabilities) through the whole chain.
    void backward(const Tensor<T>& grad_probs);
    /// Backpropagates d(loss)/d(logits), skipping the final softmax.
    void backward_from_logits(const Tensor<T>& grad_logits);

    std::vector<ParamRef<T>> params();
    std::vector<StateRef<T>> state();
    std::size_t parameter_count();

    /// Per-sample output shape of every layer for the spec's input shape.
    std::vector<std::pair<std::string, Shape>> layer_shapes() const;

    /// Re-initializes weights: He-normal conv/dense weights, 0.1 biases,
    /// unit gamma, zero beta, 0.25 PReLU slopes, fresh running statistics.
    void he_init(Rng& rng);
    /// Resets all dropout masks to a sequence derived from `seed`.
    void reseed_dropout(std::uint64_t seed);

    std::size_t layer_count() const { return layers_.size(); }
    Layer<T>& layer(std::size_t i) { return *layers_.at(i); }
    const Layer<T>& layer(std::size_t i) const { return *layers_.at(i); }

    template <typename U>
    Network<U> cast() const;

private:
    void check_finite(const Tensor<T>& t, const Layer<T>& after) const;
    void check_input(const Tensor<T>& x) const;

    NetworkSpec spec_;
    std::vector<std::unique_ptr<Layer<T>>> layers_;
    Mode mode_ = Mode::Infer;
};

/// Builds the identification chain with He initialization from `seed`.
template <typename T = float>
Network<T> build_arc_network(std::size_t classes = 100, std::uint64_t seed = 0) {
    return Network<T>(NetworkSpec::arc(classes), seed);
}

/// Closed-form learnable-parameter count of a spec.
std::size_t parameter_count(const NetworkSpec& spec);

template <typename T>
template <typename U>
Network<U> Network<T>::cast() const {
    Network<U> out(spec_, 0);
    auto& self = const_cast<Network&>(*this);
    auto src_p = self.params();
    auto dst_p = out.params();
    for (std::size_t i = 0; i < src_p.size(); ++i) *dst_p[i].value = src_p[i].value->template cast<U>();
    auto src_s = self.state();
    auto dst_s = out.state();
    for (std::size_t i = 0; i < src_s.size(); ++i) *dst_s[i].value = src_s[i].value->template cast<U>();
    out.set_mode(mode_);
    return out;
}

}  // namespace arc::nn
