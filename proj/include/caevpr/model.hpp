#pragma once

#include <cstdint>
#include <vector>

#include "caevpr/arch.hpp"
#include "caevpr/ops.hpp"
#include "caevpr/param.hpp"

namespace caevpr {

// Convolution (or transposed convolution), optionally followed by batch
// norm and PReLU. The last decoder block is a bare transposed convolution.
struct Block {
    bool transposed = false;
    bool has_norm = true;
    Stride stride;
    Param weight;
    Param bias;
    Param gamma;
    Param beta;
    RunningStats running;
    Param alpha;
};

enum class Mode { train, eval };

struct CaeModel {
    ArchSpec spec;
    LayerNormConfig layernorm;
    std::uint64_t seed = 0;
    std::vector<Block> encoder;
    std::vector<Block> decoder;

    // Trainable parameters in declaration order.
    std::vector<Param*> params();
    std::vector<const Param*> params() const;
};

CaeModel build_model(const ArchSpec& spec, std::uint64_t seed);

// Cached activations of one block for the backward pass.
struct BlockTrace {
    Tensor4 input;
    Tensor4 conv_out;
    Tensor4 norm_out;
};

struct ForwardTrace {
    Tensor4 target;  // layer-normalized input
    std::vector<BlockTrace> blocks;
    Tensor4 code;
    Tensor4 output;
};

/// Throws DimensionError unless every sample of `features` has the model's
/// input dims.
void check_input(const CaeModel& model, const Tensor4& features);

// Encoder forward on already-normalized input.
Tensor4 encoder_forward(CaeModel& model, const Tensor4& normalized, Mode mode);
Tensor4 encoder_forward(const CaeModel& model, const Tensor4& normalized);

/// Descriptors for a batch of raw feature maps: layer norm, encoder (eval
/// batch norm), flatten channel-major then row-major, L2-normalize.
std::vector<std::vector<float>> encode(const CaeModel& model, const Tensor4& features);

struct Reconstruction {
    Tensor4 output;
    double loss = 0.0;
};

// Full autoencoder pass; loss is the MSE against the normalized input. In
// train mode batch norm uses batch statistics and updates running stats.
Reconstruction reconstruct(CaeModel& model, const Tensor4& features, Mode mode);

ForwardTrace forward_traced(CaeModel& model, const Tensor4& features);

// Accumulates parameter gradients for the MSE loss of `trace`; returns the loss.
double backward(CaeModel& model, const ForwardTrace& trace);

}  // namespace caevpr
