#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "caevpr/ops.hpp"

namespace caevpr {

// Values are the FMAP / checkpoint backbone tags.
enum class Backbone : std::uint8_t { custom = 0, vgg16 = 1, alexnet = 2 };

std::string_view to_string(Backbone b);
Backbone parse_backbone(std::string_view name);

struct FeatureDims {
    int c = 0;
    int h = 0;
    int w = 0;

    std::size_t size() const { return static_cast<std::size_t>(c) * h * w; }
    std::string str() const;
    friend bool operator==(const FeatureDims&, const FeatureDims&) = default;
};

struct BlockGeometry {
    int kh = 1;
    int kw = 1;
    Stride stride;
    friend bool operator==(const BlockGeometry&, const BlockGeometry&) = default;
};

/// Architecture of the three-block encoder and its mirrored decoder.
///
/// vgg16 and alexnet pin the block geometry (kernels 4x4/7x5/5x3 and
/// 4x4/5x3/5x3, strides 1/2/2) and the backbone channel count; `custom`
/// accepts any geometry whose decoder exactly restores the input extent.
/// Kernels are (height, width).
struct ArchSpec {
    Backbone backbone = Backbone::vgg16;
    FeatureDims input{512, 30, 40};
    int d1 = 128;
    int d2 = 128;
    int d3 = 256;
    std::array<BlockGeometry, 3> blocks{};

    // Backbone geometry at the 640x480 input resolution.
    static ArchSpec canonical(Backbone backbone, int d3, int d1 = 128, int d2 = 128);
    static std::array<BlockGeometry, 3> canonical_blocks(Backbone backbone);
    static FeatureDims canonical_input(Backbone backbone);

    // Throws ArchitectureError naming the offending block.
    void validate() const;

    // Output extent of each encoder block; throws ArchitectureError when a
    // block produces non-positive spatial dims.
    std::array<FeatureDims, 3> encoder_dims() const;
    FeatureDims encoder_output() const { return encoder_dims()[2]; }
    std::size_t descriptor_dim() const { return encoder_output().size(); }

    // d3 in {8, 16, ..., 512}.
    bool canonical_d3() const;

    std::array<int, 3> encoder_channels() const { return {d1, d2, d3}; }

    friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

// Parses "KHxKW/S" or "KHxKW/SHxSW" triples separated by commas.
std::array<BlockGeometry, 3> parse_blocks(std::string_view text);

}  // namespace caevpr
