#pragma once

#include "arc/nn/tensor.hpp"

#include <cstdint>
#include <vector>

namespace arc::nn {

// Free-standing forward/backward maps. Image tensors are (N, C, H, W);
// feature tensors are (N, F). Layer classes wrap these.

/// Valid, stride-1 cross-correlation summed over input channels plus bias.
/// weight is (out, in, kh, kw), bias is (out).
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

template <typename T>
struct ConvGrads {
    Tensor<T> grad_x;  ///< empty when not requested
    Tensor<T> grad_weight;
    Tensor<T> grad_bias;
};

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& grad_out,
                             bool need_grad_x = true);

template <typename T>
struct PoolResult {
    Tensor<T> out;
    /// Flat index into the input of each output's source cell.
    std::vector<std::uint32_t> argmax;
};

/// Window maximum; the first cell in row-major window order wins ties.
template <typename T>
PoolResult<T> maxpool_forward(const Tensor<T>& x, std::size_t k, std::size_t s);

template <typename T>
Tensor<T> maxpool_backward(const Tensor<T>& grad_out, const std::vector<std::uint32_t>& argmax,
                           const Shape& input_shape);

/// y = W x + b per row; weight is (out, in).
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

template <typename T>
struct DenseGrads {
    Tensor<T> grad_x;
    Tensor<T> grad_weight;
    Tensor<T> grad_bias;
};

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& grad_out);

/// Row-wise softmax, max-shifted.
template <typename T>
Tensor<T> softmax(const Tensor<T>& z);

/// Vector-Jacobian product of softmax given its output.
template <typename T>
Tensor<T> softmax_backward(const Tensor<T>& y, const Tensor<T>& grad_y);

/// Probability floor inside the logarithm.
inline constexpr double kProbabilityFloor = 1e-12;

/// Mean over rows of -sum_j y_j log(max(p_j, floor)). Throws InvalidLabel
/// unless every row of `onehot` has a single 1 and zeros elsewhere.
template <typename T>
double cross_entropy(const Tensor<T>& probs, const Tensor<T>& onehot);

/// Gradient of the mean cross-entropy with respect to the logits that
/// produced `probs` through softmax: (p - y) / N.
template <typename T>
Tensor<T> cross_entropy_logit_grad(const Tensor<T>& probs, const Tensor<T>& onehot);


}  // namespace arc::nn
