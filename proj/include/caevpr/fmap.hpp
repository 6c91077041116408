#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "caevpr/arch.hpp"
#include "caevpr/binary_io.hpp"
#include "caevpr/tensor.hpp"

namespace caevpr {

inline constexpr std::uint16_t kFmapVersion = 1;

/// Backbone feature maps keyed by image id, all sharing one (c, h, w).
///
/// On disk (little-endian): "FMAP", version u16, backbone tag u8, c h w u32,
/// count u32, then per record an id (u16 length + UTF-8 bytes) and c*h*w
/// float32 values.
class FeatureMapSet {
public:
    FeatureMapSet() = default;
    FeatureMapSet(Backbone backbone, FeatureDims dims);

    // Throws DataError on duplicate/empty ids, DimensionError on payload size.
    void add(std::string id, std::span<const float> payload);

    Backbone backbone() const { return backbone_; }
    const FeatureDims& dims() const { return dims_; }
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    const std::vector<std::string>& ids() const { return ids_; }
    std::span<const float> record(std::size_t i) const;

    // Gathers the listed records into an (n, c, h, w) tensor.
    Tensor4 batch(std::span<const std::size_t> indices) const;
    Tensor4 batch(std::size_t first, std::size_t count) const;

    friend bool operator==(const FeatureMapSet& a, const FeatureMapSet& b) {
        return a.backbone_ == b.backbone_ && a.dims_ == b.dims_ && a.ids_ == b.ids_ &&
               a.payload_ == b.payload_;
    }

private:
    Backbone backbone_ = Backbone::custom;
    FeatureDims dims_{};
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<float> payload_;
};

Bytes serialize_fmap(const FeatureMapSet& set);
FeatureMapSet parse_fmap(std::span<const std::uint8_t> bytes);

void write_fmap(const std::filesystem::path& path, const FeatureMapSet& set);
FeatureMapSet read_fmap(const std::filesystem::path& path);

}  // namespace caevpr
