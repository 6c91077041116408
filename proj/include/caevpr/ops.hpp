#pragma once

// Forward and backward kernels for the layers of the autoencoder. Forward
// kernels are pure: inputs are never modified and results are freshly
// allocated. Reductions accumulate in double precision.

#include <optional>
#include <span>
#include <vector>

#include "caevpr/tensor.hpp"

namespace caevpr {

struct Stride {
    int h = 1;
    int w = 1;
    friend bool operator==(const Stride&, const Stride&) = default;
};

// Output spatial extent of a valid (unpadded) strided convolution.
inline int conv_out_extent(int in, int kernel, int stride) { return (in - kernel) / stride + 1; }
// Output spatial extent of the matching transposed convolution.
inline int deconv_out_extent(int in, int kernel, int stride) { return (in - 1) * stride + kernel; }

struct ConvGrads {
    Tensor4 grad_input;
    Tensor4 grad_weights;
    Tensor4 grad_bias;
};

/// Valid cross-correlation. `weights` is (c_out, c_in, kh, kw), `bias` is
/// (c_out, 1, 1, 1).
Tensor4 conv2d_forward(const Tensor4& input, const Tensor4& weights, const Tensor4& bias,
                       Stride stride);

// With `input_grad` false, grad_input is left empty.
ConvGrads conv2d_backward(const Tensor4& input, const Tensor4& weights, Stride stride,
                          const Tensor4& grad_out, bool input_grad = true);

/// Transposed convolution, the adjoint of conv2d_forward for the same kernel
/// and stride. `weights` is (c_in, c_out, kh, kw), `bias` is (c_out, 1, 1, 1).
Tensor4 deconv2d_forward(const Tensor4& input, const Tensor4& weights, const Tensor4& bias,
                         Stride stride);

ConvGrads deconv2d_backward(const Tensor4& input, const Tensor4& weights, Stride stride,
                            const Tensor4& grad_out);

struct RunningStats {
    std::vector<float> mean;
    std::vector<float> var;

    static RunningStats identity(int channels);
};

struct BatchNormOptions {
    float momentum = 0.1f;
    float epsilon = 1e-5f;
    bool training = true;
};

// Per-channel normalization over (n, h, w). In training mode batch
// statistics are used and `running` is updated with the unbiased batch
// variance; in eval mode `running` is used as-is.
Tensor4 batchnorm_forward(const Tensor4& input, const Tensor4& gamma, const Tensor4& beta,
                          RunningStats& running, const BatchNormOptions& opts);

struct BatchNormGrads {
    Tensor4 grad_input;
    Tensor4 grad_gamma;
    Tensor4 grad_beta;
};

// Gradient of the training-mode forward; batch statistics are recomputed
// from `input`.
BatchNormGrads batchnorm_backward(const Tensor4& input, const Tensor4& gamma,
                                  const Tensor4& grad_out, float epsilon = 1e-5f);

// f(x) = x for x > 0, alpha_c * x otherwise. `alpha` is (c, 1, 1, 1).
Tensor4 prelu_forward(const Tensor4& input, const Tensor4& alpha);

struct PReluGrads {
    Tensor4 grad_input;
    Tensor4 grad_alpha;
};

PReluGrads prelu_backward(const Tensor4& input, const Tensor4& alpha, const Tensor4& grad_out);

enum class LayerNormMode { per_sample, frozen_stats };

struct LayerNormConfig {
    float epsilon = 1e-5f;
    LayerNormMode mode = LayerNormMode::per_sample;
    std::optional<float> frozen_mean;
    std::optional<float> frozen_var;

    void validate() const;
};

/// Normalizes every sample to zero mean and unit population variance over all
/// of its c*h*w elements, or with the stored statistics in frozen_stats
/// mode. No affine terms.
Tensor4 layernorm(const Tensor4& input, const LayerNormConfig& cfg);

Tensor4 layernorm_backward(const Tensor4& input, const LayerNormConfig& cfg,
                           const Tensor4& grad_out);

struct MseResult {
    double loss = 0.0;
    Tensor4 grad;
};

// Batch mean of the per-sample mean squared error, with its gradient.
MseResult mse_loss(const Tensor4& prediction, const Tensor4& target);

std::vector<float> l2_normalize(std::span<const float> v);

}  // namespace caevpr
