#include "arc/training/optimizer.hpp"

#include "arc/common/file.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace arc::training {

namespace {

template <typename T>
void require_finite(std::span<const T> grad, const std::string& what) {
    for (const T g : grad) {
        if (!std::isfinite(g)) throw Error(ErrorCode::NumericalError, "non-finite gradient in " + what);
    }
}

constexpr char kMagic[8] = {'A', 'R', 'C', 'O', 'P', 'T', 'M', '\0'};

}  // namespace

template <typename T>
void amsgrad_update(std::span<T> param, std::span<const T> grad, MomentState<T>& state, double lr, double decay,
                    const AmsGradConfig& cfg) {
    if (param.size() != grad.size()) throw Error(ErrorCode::ShapeError, "parameter and gradient lengths differ");
    if (state.m.size() != param.size()) state = MomentState<T>(param.size());
    require_finite(grad, "update");
    const double b1 = cfg.beta1, b2 = cfg.beta2;
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double p = param[i];
        const double g = static_cast<double>(grad[i]) + decay * p;
        const double m = b1 * state.m[i] + (1.0 - b1) * g;
        const double v = b2 * state.v[i] + (1.0 - b2) * g * g;
        const double vhat = std::max(static_cast<double>(state.vhat[i]), v);
        state.m[i] = static_cast<T>(m);
        state.v[i] = static_cast<T>(v);
        state.vhat[i] = static_cast<T>(vhat);
        param[i] = static_cast<T>(p - lr * m / (std::sqrt(vhat) + cfg.epsilon));
    }
}

template <typename T>
void AmsGrad<T>::step(const std::vector<nn::ParamRef<T>>& params, double lr) {
    if (!(lr > 0.0)) throw Error(ErrorCode::ConfigError, "learning rate must be positive");
    for (const auto& p : params) require_finite<T>(p.grad->values(), p.name);
    if (state_.size() != params.size()) {
        state_.clear();
        for (const auto& p : params) state_.emplace_back(p.value->size());
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& p = params[i];
        amsgrad_update<T>(p.value->values(), p.grad->values(), state_[i], lr, p.decay ? cfg_.weight_decay : 0.0,
                          cfg_);
    }
    ++t_;
}

template <typename T>
void AmsGrad<T>::save(const std::filesystem::path& path) const {
    std::vector<std::uint8_t> out(kMagic, kMagic + 8);
    auto put = [&](std::uint64_t v, int bytes) {
        for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    put(t_, 8);
    put(state_.size(), 8);
    for (const auto& s : state_) {
        put(s.m.size(), 8);
        for (const auto* arr : {&s.m, &s.v, &s.vhat})
            for (const T v : *arr) put(std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
    }
    write_file_atomic(path, out);
}

template <typename T>
void AmsGrad<T>::load(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    std::size_t pos = 0;
    auto get = [&](int n) {
        if (bytes.size() - pos < static_cast<std::size_t>(n)) {
            throw Error(ErrorCode::IoError, path.string() + ": optimizer state truncated");
        }
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
        pos += n;
        return v;
    };
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
        throw Error(ErrorCode::IoError, path.string() + ": not an optimizer state file");
    }
    pos = 8;
    const std::uint64_t t = get(8);
    std::vector<MomentState<T>> state(get(8));
    for (auto& s : state) {
        s = MomentState<T>(get(8));
        for (auto* arr : {&s.m, &s.v, &s.vhat})
            for (T& v : *arr) v = static_cast<T>(std::bit_cast<float>(static_cast<std::uint32_t>(get(4))));
    }
    if (pos != bytes.size()) throw Error(ErrorCode::IoError, path.string() + ": trailing bytes in optimizer state");
    t_ = t;
    state_ = std::move(state);
}

template void amsgrad_update<float>(std::span<float>, std::span<const float>, MomentState<float>&, double, double,
                                    const AmsGradConfig&);
template void amsgrad_update<double>(std::span<double>, std::span<const double>, MomentState<double>&, double,
                                     double, const AmsGradConfig&);
template class AmsGrad<float>;
template class AmsGrad<double>;

}  // namespace arc::training
