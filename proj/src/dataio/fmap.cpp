#include "caevpr/fmap.hpp"

#include <cstring>

#include "caevpr/error.hpp"

namespace caevpr {

FeatureMapSet::FeatureMapSet(Backbone backbone, FeatureDims dims) : backbone_(backbone), dims_(dims) {
    if (dims.c < 1 || dims.h < 1 || dims.w < 1)
        throw DimensionError("feature map dims must be positive, got " + dims.str());
}

void FeatureMapSet::add(std::string id, std::span<const float> payload) {
    if (id.empty()) throw DataError("feature map id must not be empty");
    if (payload.size() != dims_.size())
        throw DimensionError("feature map '" + id + "' has " + std::to_string(payload.size()) +
                             " values, expected " + std::to_string(dims_.size()) + " (" +
                             dims_.str() + ")");
    if (index_.contains(id)) throw DataError("duplicate feature map id '" + id + "'");
    index_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    payload_.insert(payload_.end(), payload.begin(), payload.end());
}

std::span<const float> FeatureMapSet::record(std::size_t i) const {
    return std::span<const float>(payload_).subspan(i * dims_.size(), dims_.size());
}

Tensor4 FeatureMapSet::batch(std::span<const std::size_t> indices) const {
    Tensor4 t({static_cast<int>(indices.size()), dims_.c, dims_.h, dims_.w});
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const auto r = record(indices[k]);
        std::memcpy(t.sample(static_cast<int>(k)), r.data(), r.size_bytes());
    }
    return t;
}

Tensor4 FeatureMapSet::batch(std::size_t first, std::size_t count) const {
    std::vector<std::size_t> idx(count);
    for (std::size_t k = 0; k < count; ++k) idx[k] = first + k;
    return batch(idx);
}

Bytes serialize_fmap(const FeatureMapSet& set) {
    ByteWriter w;
    w.raw("FMAP");
    w.u16(kFmapVersion);
    w.u8(static_cast<std::uint8_t>(set.backbone()));
    w.u32(static_cast<std::uint32_t>(set.dims().c));
    w.u32(static_cast<std::uint32_t>(set.dims().h));
    w.u32(static_cast<std::uint32_t>(set.dims().w));
    w.u32(static_cast<std::uint32_t>(set.size()));
    for (std::size_t i = 0; i < set.size(); ++i) {
        w.short_string(set.ids()[i]);
        w.f32s(set.record(i));
    }
    return w.take();
}

FeatureMapSet parse_fmap(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "FMAP header");
    if (r.raw(4) != "FMAP") throw FormatError("not an FMAP file (bad magic)");
    const std::uint16_t version = r.u16();
    if (version != kFmapVersion)
        throw FormatError("unsupported FMAP version " + std::to_string(version));
    const std::uint8_t tag = r.u8();
    if (tag > static_cast<std::uint8_t>(Backbone::alexnet))
        throw FormatError("unknown FMAP backbone tag " + std::to_string(tag));
    const std::uint32_t c = r.u32();
    const std::uint32_t h = r.u32();
    const std::uint32_t w = r.u32();
    const std::uint32_t count = r.u32();
    if (c == 0 || h == 0 || w == 0 || c > 1u << 20 || h > 1u << 20 || w > 1u << 20)
        throw FormatError("invalid FMAP dims " + std::to_string(c) + "x" + std::to_string(h) + "x" +
                          std::to_string(w));
    const FeatureDims dims{static_cast<int>(c), static_cast<int>(h), static_cast<int>(w)};
    FeatureMapSet set(static_cast<Backbone>(tag), dims);
    std::vector<float> payload(dims.size());
    for (std::uint32_t i = 0; i < count; ++i) {
        r.set_context("FMAP record " + std::to_string(i));
        std::string id = r.short_string();
        r.f32s(payload);
        try {
            set.add(std::move(id), payload);
        } catch (const DataError& e) {
            throw FormatError("FMAP record " + std::to_string(i) + ": " + e.what());
        }
    }
    r.set_context("FMAP");
    r.expect_end();
    return set;
}

void write_fmap(const std::filesystem::path& path, const FeatureMapSet& set) {
    write_file(path, serialize_fmap(set));
}

FeatureMapSet read_fmap(const std::filesystem::path& path) { return parse_fmap(read_file(path)); }

}  // namespace caevpr
