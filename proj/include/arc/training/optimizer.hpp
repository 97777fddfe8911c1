#pragma once

#include "arc/nn/layers.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace arc::training {

struct AmsGradConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;  ///< coupled L2, only on parameters flagged for decay
};

template <typename T>
struct MomentState {
    std::vector<T> m, v, vhat;

    explicit MomentState(std::size_t n = 0) : m(n), v(n), vhat(n) {}
};

/// One AMSGrad update of a single array, without bias correction:
///   g = grad + decay*param; m = b1 m + (1-b1) g; v = b2 v + (1-b2) g^2;
///   vhat = max(vhat, v); param -= lr * m / (sqrt(vhat) + eps)
/// Throws NumericalError, leaving everything untouched, if any gradient is
/// not finite.
template <typename T>
void amsgrad_update(std::span<T> param, std::span<const T> grad, MomentState<T>& state, double lr, double decay,
                    const AmsGradConfig& cfg);

/// Optimizer over a network's parameter list (in params() order).
template <typename T>
class AmsGrad {
public:
    explicit AmsGrad(AmsGradConfig cfg = {}) : cfg_(cfg) {}

    /// Updates every parameter from its gradient slot. All gradients are
    /// checked before anything changes, so a NumericalError aborts the whole
    /// step.
    void step(const std::vector<nn::ParamRef<T>>& params, double lr);

    std::uint64_t steps() const { return t_; }
    const AmsGradConfig& config() const { return cfg_; }
    const std::vector<MomentState<T>>& moments() const { return state_; }

    void save(const std::filesystem::path& path) const;
    void load(const std::filesystem::path& path);

private:
    AmsGradConfig cfg_;
    std::vector<MomentState<T>> state_;
    std::uint64_t t_ = 0;
};

}  // namespace arc::training
