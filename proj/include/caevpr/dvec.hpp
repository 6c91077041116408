#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "caevpr/binary_io.hpp"

namespace caevpr {

inline constexpr std::uint16_t kDvecVersion = 1;
inline constexpr double kUnitNormTolerance = 1e-4;

// Order in which an encoder output (c, h, w) is flattened.
enum class FlattenOrder : std::uint8_t { channel_major = 0 };

/// Unit-norm global descriptors keyed by image id.
///
/// On disk (little-endian): "DVEC", version u16, dim u32, count u32,
/// flatten-order tag u8, model checksum u64, then per record an id (u16
/// length + UTF-8 bytes) and dim float32 values.
class DescriptorSet {
public:
    DescriptorSet() = default;
    explicit DescriptorSet(std::uint32_t dim, FlattenOrder order = FlattenOrder::channel_major,
                           std::uint64_t model_checksum = 0);

    // Rejects ids already present, wrong lengths, and vectors whose norm is
    // off by more than kUnitNormTolerance.
    void add(std::string id, std::span<const float> vec);

    std::uint32_t dim() const { return dim_; }
    FlattenOrder order() const { return order_; }
    std::uint64_t model_checksum() const { return checksum_; }
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    const std::vector<std::string>& ids() const { return ids_; }
    std::span<const float> vector(std::size_t i) const;
    std::optional<std::size_t> find(const std::string& id) const;

    friend bool operator==(const DescriptorSet& a, const DescriptorSet& b) {
        return a.dim_ == b.dim_ && a.order_ == b.order_ && a.checksum_ == b.checksum_ &&
               a.ids_ == b.ids_ && a.data_ == b.data_;
    }

private:
    std::uint32_t dim_ = 0;
    FlattenOrder order_ = FlattenOrder::channel_major;
    std::uint64_t checksum_ = 0;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<float> data_;
};

Bytes serialize_dvec(const DescriptorSet& set);
DescriptorSet parse_dvec(std::span<const std::uint8_t> bytes);

void write_dvec(const std::filesystem::path& path, const DescriptorSet& set);
DescriptorSet read_dvec(const std::filesystem::path& path);

}  // namespace caevpr
