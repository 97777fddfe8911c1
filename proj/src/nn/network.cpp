#include "arc/nn/network.hpp"

#include <cmath>

namespace arc::nn {

NetworkSpec NetworkSpec::arc(std::size_t classes) {
    NetworkSpec s;
    s.classes = classes;
    return s;
}

NetworkSpec NetworkSpec::gradient_check() {
    NetworkSpec s;
    s.input = {3, 20, 20};
    s.conv_channels = {3, 4};
    s.pools = {2, 2};
    s.hidden = {12, 8};
    s.classes = 5;
    return s;
}

nlohmann::json NetworkSpec::to_json() const {
    return {{"input", input},   {"conv_channels", conv_channels}, {"pools", pools}, {"kernel", kernel},
            {"hidden", hidden}, {"classes", classes},             {"dropout", dropout}};
}

NetworkSpec NetworkSpec::from_json(const nlohmann::json& j) {
    try {
        NetworkSpec s;
        s.input = j.at("input").get<Shape>();
        s.conv_channels = j.at("conv_channels").get<std::vector<std::size_t>>();
        s.pools = j.at("pools").get<std::vector<std::size_t>>();
        s.kernel = j.at("kernel").get<std::size_t>();
        s.hidden = j.at("hidden").get<std::vector<std::size_t>>();
        s.classes = j.at("classes").get<std::size_t>();
        s.dropout = j.at("dropout").get<double>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("bad architecture description: ") + e.what());
    }
}

template <typename T>
Network<T>::Network(const NetworkSpec& spec, std::uint64_t seed) : spec_(spec) {
    if (spec.input.size() != 3) throw Error(ErrorCode::ConfigError, "network input must be (C,H,W)");
    if (spec.conv_channels.size() != spec.pools.size()) {
        throw Error(ErrorCode::ConfigError, "one pool size is needed per conv stage");
    }
    if (spec.classes < 1) throw Error(ErrorCode::ConfigError, "network needs at least one class");

    std::size_t channels = spec.input[0];
    for (std::size_t i = 0; i < spec.conv_channels.size(); ++i) {
        const std::string n = std::to_string(i + 1);
        auto conv = std::make_unique<Conv2d<T>>("conv" + n, channels, spec.conv_channels[i], spec.kernel);
        if (i == 0) conv->set_input_grad(false);
        layers_.push_back(std::move(conv));
        channels = spec.conv_channels[i];
        layers_.push_back(std::make_unique<BatchNorm2d<T>>("bn" + n, channels));
        layers_.push_back(std::make_unique<PReLU<T>>("prelu" + n, channels));
        layers_.push_back(std::make_unique<MaxPool2d<T>>("pool" + n, spec.pools[i], spec.pools[i]));
    }
    layers_.push_back(std::make_unique<Flatten<T>>("flatten"));

    // Shapes are resolved layer by layer so a bad spec fails here, not mid-batch.
    Shape shape = spec.input;
    for (const auto& l : layers_) shape = l->output_shape(shape);
    std::size_t features = shape.at(0);

    std::size_t prelu_index = spec.conv_channels.size();
    for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
        const std::string n = std::to_string(i + 1);
        layers_.push_back(std::make_unique<Dense<T>>("fc" + n, features, spec.hidden[i]));
        layers_.push_back(std::make_unique<PReLU<T>>("prelu" + std::to_string(++prelu_index), 1));
        layers_.push_back(std::make_unique<Dropout<T>>("dropout" + n, spec.dropout, 0));
        features = spec.hidden[i];
    }
    layers_.push_back(
        std::make_unique<Dense<T>>("fc" + std::to_string(spec.hidden.size() + 1), features, spec.classes));
    layers_.push_back(std::make_unique<Softmax<T>>("softmax"));

    Rng rng(seed);
    he_init(rng);
    reseed_dropout(seed);
}

template <typename T>
Network<T>::Network(const Network& other) : spec_(other.spec_), mode_(other.mode_) {
    layers_.reserve(other.layers_.size());
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

template <typename T>
Network<T>& Network<T>::operator=(const Network& other) {
    if (this != &other) {
        Network copy(other);
        *this = std::move(copy);
    }
    return *this;
}

template <typename T>
void Network<T>::check_input(const Tensor<T>& x) const {
    Shape expected{x.rank() > 0 ? x.dim(0) : 0};
    expected.insert(expected.end(), spec_.input.begin(), spec_.input.end());
    if (x.shape() != expected) {
        throw Error(ErrorCode::ShapeError,
                    "network expects (N," + to_string(spec_.input).substr(1) + " input, got " + to_string(x.shape()));
    }
    if (!x.all_finite()) throw Error(ErrorCode::NumericalError, "non-finite value in network input");
}

template <typename T>
void Network<T>::check_finite(const Tensor<T>& t, const Layer<T>& after) const {
    if (!t.all_finite()) throw Error(ErrorCode::NumericalError, "non-finite value after " + after.name());
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& x) {
    check_input(x);
    Tensor<T> h = x;
    for (auto& l : layers_) {
        h = l->forward(std::move(h), mode_);
        check_finite(h, *l);
    }
    return h;
}

template <typename T>
std::vector<Tensor<T>> Network<T>::forward_trace(const Tensor<T>& x) {
    check_input(x);
    std::vector<Tensor<T>> outs;
    outs.reserve(layers_.size());
    const Tensor<T>* h = &x;
    for (auto& l : layers_) {
        outs.push_back(l->forward(*h, mode_));
        check_finite(outs.back(), *l);
        h = &outs.back();
    }
    return outs;
}

template <typename T>
Tensor<T> Network<T>::infer(const Tensor<T>& x) const {
    check_input(x);
    Tensor<T> h = x;
    for (const auto& l : layers_) {
        h = l->infer(h);
        check_finite(h, *l);
    }
    return h;
}

template <typename T>
void Network<T>::backward(const Tensor<T>& grad_probs) {
    Tensor<T> g = grad_probs;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
        g = (*it)->backward(g);
        if (it + 1 != layers_.rend()) check_finite(g, **it);
    }
}

template <typename T>
void Network<T>::backward_from_logits(const Tensor<T>& grad_logits) {
    Tensor<T> g = grad_logits;
    for (auto it = layers_.rbegin() + 1; it != layers_.rend(); ++it) {
        g = (*it)->backward(g);
        if (it + 1 != layers_.rend()) check_finite(g, **it);
    }
}

template <typename T>
std::vector<ParamRef<T>> Network<T>::params() {
    std::vector<ParamRef<T>> out;
    for (auto& l : layers_) {
        auto p = l->params();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

template <typename T>
std::vector<StateRef<T>> Network<T>::state() {
    std::vector<StateRef<T>> out;
    for (auto& l : layers_) {
        auto s = l->state();
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

template <typename T>
std::size_t Network<T>::parameter_count() {
    std::size_t n = 0;
    for (const auto& p : params()) n += p.value->size();
    return n;
}

template <typename T>
std::vector<std::pair<std::string, Shape>> Network<T>::layer_shapes() const {
    std::vector<std::pair<std::string, Shape>> out;
    Shape s = spec_.input;
    for (const auto& l : layers_) {
        s = l->output_shape(s);
        out.emplace_back(l->name(), s);
    }
    return out;
}

template <typename T>
void Network<T>::he_init(Rng& rng) {
    auto fill_normal = [&](Tensor<T>& w, std::size_t fan_in) {
        const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (auto& v : w.values()) v = static_cast<T>(rng.normal() * std_dev);
    };
    for (auto& l : layers_) {
        if (auto* c = dynamic_cast<Conv2d<T>*>(l.get())) {
            fill_normal(c->weight, c->weight.size() / c->weight.dim(0));
            c->bias.fill(static_cast<T>(0.1));
        } else if (auto* d = dynamic_cast<Dense<T>*>(l.get())) {
            fill_normal(d->weight, d->in_features());
            d->bias.fill(static_cast<T>(0.1));
        } else if (auto* b = dynamic_cast<BatchNorm2d<T>*>(l.get())) {
            b->gamma.fill(T{1});
            b->beta.fill(T{0});
            b->running_mean.fill(T{0});
            b->running_var.fill(T{1});
        } else if (auto* p = dynamic_cast<PReLU<T>*>(l.get())) {
            p->alpha.fill(static_cast<T>(PReLU<T>::kInitialAlpha));
        }
    }
}

template <typename T>
void Network<T>::reseed_dropout(std::uint64_t seed) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (auto* d = dynamic_cast<Dropout<T>*>(layers_[i].get())) d->reseed(derive_seed(seed, i));
    }
}

std::size_t parameter_count(const NetworkSpec& spec) {
    std::size_t total = 0;
    std::size_t c = spec.input[0], h = spec.input[1], w = spec.input[2];
    for (std::size_t i = 0; i < spec.conv_channels.size(); ++i) {
        const std::size_t o = spec.conv_channels[i];
        total += o * c * spec.kernel * spec.kernel + o;  // conv
        total += 2 * o;                                   // bn
        total += o;                                       // prelu
        h = (h - spec.kernel + 1 - spec.pools[i]) / spec.pools[i] + 1;
        w = (w - spec.kernel + 1 - spec.pools[i]) / spec.pools[i] + 1;
        c = o;
    }
    std::size_t f = c * h * w;
    for (const std::size_t u : spec.hidden) {
        total += u * f + u + 1;
        f = u;
    }
    return total + spec.classes * f + spec.classes;
}

template class Network<float>;
template class Network<double>;

}  // namespace arc::nn
